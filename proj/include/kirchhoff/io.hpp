#pragma once

#include <optional>
#include <string>

#include "kirchhoff/asymptotics.hpp"
#include "kirchhoff/minimizer.hpp"

namespace kirchhoff {

/// Write via temp file + rename so readers never observe partial output.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// %.17g, round-trip exact.
std::string fmt17(double v);

// ---- ground state ----
std::string profile_csv(const RadialProfile& p);                    // r, q, dq
std::string constants_json(const GroundStateConstants& c);
GroundStateConstants parse_constants_json(const std::string& text);

// ---- potential ----
std::string potential_json(const PotentialSpec& spec);
PotentialSpec parse_potential_json(const std::string& text);
std::string wells_json(const WellAnalysis& a, const PotentialSpec& spec);
WellAnalysis parse_wells_json(const std::string& text, std::vector<Vec2>* locations = nullptr);

// ---- fields ----
std::string field_csv(const Field2D& u);
std::string field_sidecar_json(const GridSpec& g);
Field2D parse_field_csv(const std::string& csv, const std::string& sidecar);

// ---- minimizer ----
std::string result_json(const MinimizerResult& r);
std::string iteration_log_csv(const std::vector<IterationLogRow>& log);

// ---- sweep / fit / report ----
std::string sweep_csv(const SweepResult& s);
std::string sweep_meta_json(const SweepResult& s);
SweepResult parse_sweep_csv(const std::string& csv, const std::string* meta_json = nullptr);
std::string fit_json(const FitResult& f, const std::string& mode);
std::string report_json(const DiagnosticsReport& r);

/// Accepts "astar", "<mult>astar" (e.g. "2astar", "1.5astar") or a number.
double parse_a_value(const std::string& text, std::optional<double> a_star);

/// FNV-1a 64-bit over the file bytes; empty optional when unreadable.
std::optional<uint64_t> file_hash(const std::string& path);

}  // namespace kirchhoff
