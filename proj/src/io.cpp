#include "kirchhoff/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace kirchhoff {

using nlohmann::json;

void atomic_write(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::invalid_argument("cannot write " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string profile_csv(const RadialProfile& p) {
    std::string out = "r,q,dq\n";
    for (size_t i = 0; i < p.r_grid.size(); ++i) {
        out += fmt17(p.r_grid[i]);
        out += ',';
        out += fmt17(p.q_values[i]);
        out += ',';
        out += fmt17(p.dq_values[i]);
        out += '\n';
    }
    return out;
}

std::string constants_json(const GroundStateConstants& c) {
    json j;
    j["a_star"] = c.a_star;
    j["second_moment"] = c.second_moment;
    j["quartic"] = c.quartic;
    j["decay_rate"] = c.decay_rate;
    j["q0_star"] = c.q0_star;
    return j.dump(2) + "\n";
}

GroundStateConstants parse_constants_json(const std::string& text) {
    json j = json::parse(text);
    GroundStateConstants c;
    c.a_star = j.at("a_star").get<double>();
    c.second_moment = j.at("second_moment").get<double>();
    c.quartic = j.at("quartic").get<double>();
    c.decay_rate = j.at("decay_rate").get<double>();
    c.q0_star = j.at("q0_star").get<double>();
    c.grad_sq = c.a_star;  // identity of the converged profile
    return c;
}

namespace {

std::string model_name(WellModel m) {
    switch (m) {
        case WellModel::Isotropic: return "isotropic";
        case WellModel::Anisotropic: return "anisotropic";
        case WellModel::Dihedral: return "dihedral";
    }
    return "?";
}

WellModel model_from(const std::string& s) {
    if (s == "isotropic") return WellModel::Isotropic;
    if (s == "anisotropic") return WellModel::Anisotropic;
    if (s == "dihedral") return WellModel::Dihedral;
    throw std::invalid_argument("potential: unknown well model '" + s + "'");
}

}  // namespace

std::string potential_json(const PotentialSpec& spec) {
    json j;
    j["composition"] = spec.composition == Composition::Product ? "product" : "single";
    j["wells"] = json::array();
    for (const auto& w : spec.wells) {
        json jw;
        jw["x"] = {w.location.x, w.location.y};
        jw["p"] = w.degree;
        jw["model"] = model_name(w.model);
        json params;
        switch (w.model) {
            case WellModel::Isotropic:
                params["c"] = w.c;
                break;
            case WellModel::Anisotropic:
                params["c1"] = w.c1;
                params["c2"] = w.c2;
                break;
            case WellModel::Dihedral:
                params["c"] = w.c;
                params["kappa"] = w.kappa;
                params["k"] = w.k_fold;
                break;
        }
        jw["params"] = params;
        j["wells"].push_back(jw);
    }
    j["envelope"] = {{"C", spec.envelope.C}, {"beta", spec.envelope.beta}};
    return j.dump(2) + "\n";
}

PotentialSpec parse_potential_json(const std::string& text) {
    json j = json::parse(text);
    PotentialSpec spec;
    std::string comp = j.value("composition", "single");
    if (comp == "product")
        spec.composition = Composition::Product;
    else if (comp == "single")
        spec.composition = Composition::Single;
    else
        throw std::invalid_argument("potential: unknown composition '" + comp + "'");
    for (const auto& jw : j.at("wells")) {
        WellSpec w;
        w.location = {jw.at("x").at(0).get<double>(), jw.at("x").at(1).get<double>()};
        w.degree = jw.at("p").get<double>();
        w.model = model_from(jw.at("model").get<std::string>());
        json params = jw.value("params", json::object());
        switch (w.model) {
            case WellModel::Isotropic:
                w.c = params.value("c", 1.0);
                break;
            case WellModel::Anisotropic:
                w.c1 = params.value("c1", 1.0);
                w.c2 = params.value("c2", 1.0);
                break;
            case WellModel::Dihedral:
                w.c = params.value("c", 1.0);
                w.kappa = params.value("kappa", 0.0);
                w.k_fold = params.value("k", 2);
                break;
        }
        spec.wells.push_back(w);
    }
    if (j.contains("envelope")) {
        spec.envelope.C = j["envelope"].value("C", 0.0);
        spec.envelope.beta = j["envelope"].value("beta", 0.0);
    }
    validate(spec);
    return spec;
}

std::string wells_json(const WellAnalysis& a, const PotentialSpec& spec) {
    json j;
    j["p"] = a.p;
    j["lambda0"] = a.lambda0;
    j["zbar"] = a.zbar;
    j["z0"] = a.z0;
    j["all_converged"] = a.all_converged;
    j["wells"] = json::array();
    for (const auto& w : a.wells) {
        json jw;
        jw["index"] = w.index;
        jw["degree"] = w.degree;
        jw["lambda"] = w.lambda;
        jw["y_star"] = {w.y_star.x, w.y_star.y};
        jw["grad_norm"] = w.grad_norm;
        jw["converged"] = w.converged;
        j["wells"].push_back(jw);
    }
    j["locations"] = json::array();
    for (const auto& w : spec.wells) j["locations"].push_back({w.location.x, w.location.y});
    return j.dump(2) + "\n";
}

WellAnalysis parse_wells_json(const std::string& text, std::vector<Vec2>* locations) {
    json j = json::parse(text);
    WellAnalysis a;
    a.p = j.at("p").get<double>();
    a.lambda0 = j.at("lambda0").get<double>();
    a.zbar = j.at("zbar").get<std::vector<int>>();
    a.z0 = j.at("z0").get<std::vector<int>>();
    a.all_converged = j.value("all_converged", true);
    for (const auto& jw : j.at("wells")) {
        WellReport w;
        w.index = jw.at("index").get<int>();
        w.degree = jw.at("degree").get<double>();
        w.lambda = jw.at("lambda").get<double>();
        w.y_star = {jw.at("y_star").at(0).get<double>(), jw.at("y_star").at(1).get<double>()};
        w.grad_norm = jw.value("grad_norm", 0.0);
        w.converged = jw.value("converged", true);
        a.wells.push_back(w);
    }
    if (locations && j.contains("locations"))
        for (const auto& loc : j["locations"])
            locations->push_back({loc.at(0).get<double>(), loc.at(1).get<double>()});
    return a;
}

std::string field_csv(const Field2D& u) {
    std::string out;
    out.reserve(u.values.size() * 20);
    int n = u.grid.n;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j) out += ',';
            out += fmt17(u.at(i, j));
        }
        out += '\n';
    }
    return out;
}

std::string field_sidecar_json(const GridSpec& g) {
    json j;
    j["L"] = g.half_width;
    j["n"] = g.n;
    j["h"] = g.h();
    j["boundary"] = "dirichlet_zero";
    return j.dump(2) + "\n";
}

Field2D parse_field_csv(const std::string& csv, const std::string& sidecar) {
    json j = json::parse(sidecar);
    GridSpec g;
    g.half_width = j.at("L").get<double>();
    g.n = j.at("n").get<int>();
    validate(g);
    Field2D u(g);
    std::istringstream in(csv);
    std::string line;
    int i = 0;
    while (std::getline(in, line) && i < g.n) {
        std::istringstream row(line);
        std::string cell;
        int jcol = 0;
        while (std::getline(row, cell, ',') && jcol < g.n) u.at(i, jcol++) = std::stod(cell);
        if (jcol != g.n) throw std::invalid_argument("field csv: wrong column count");
        ++i;
    }
    if (i != g.n) throw std::invalid_argument("field csv: wrong row count");
    return u;
}

std::string result_json(const MinimizerResult& r) {
    json j;
    j["energy"] = {{"kinetic", r.breakdown.kinetic},
                   {"potential", r.breakdown.potential},
                   {"kirchhoff", r.breakdown.kirchhoff},
                   {"interaction", r.breakdown.interaction},
                   {"total", r.breakdown.total}};
    j["mu"] = r.mu;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["status"] = r.status == SolveStatus::Converged
                      ? "converged"
                      : (r.status == SolveStatus::BlowupDetected ? "blowup_detected"
                                                                 : "not_converged");
    j["residual"] = r.residual;
    j["peak"] = {r.peak.x, r.peak.y};
    j["peak_value"] = r.peak_value;
    j["integrals"] = {{"mass", r.integrals.mass}, {"theta", r.integrals.theta},
                      {"l4", r.integrals.l4}};
    j["v_integral"] = r.v_integral;
    return j.dump(2) + "\n";
}

std::string iteration_log_csv(const std::vector<IterationLogRow>& log) {
    std::string out = "iter,energy,residual,dt,theta\n";
    for (const auto& row : log) {
        out += std::to_string(row.iter);
        out += ',';
        out += fmt17(row.energy);
        out += ',';
        out += fmt17(row.residual);
        out += ',';
        out += fmt17(row.dt);
        out += ',';
        out += fmt17(row.theta);
        out += '\n';
    }
    return out;
}

std::string sweep_csv(const SweepResult& s) {
    std::string out =
        "b,energy,theta,l4,v_integral,mu,z_x,z_y,eps_meas,eps_theory,l2_dist,h1_dist,iters,"
        "converged,resolution_ok\n";
    for (const auto& r : s.rows) {
        out += fmt17(r.b);
        for (double v : {r.energy, r.theta, r.l4, r.v_integral, r.mu, r.z.x, r.z.y, r.eps_meas,
                         r.eps_theory, r.l2_dist, r.h1_dist}) {
            out += ',';
            out += fmt17(v);
        }
        out += ',';
        out += std::to_string(r.iters);
        out += ',';
        out += r.converged ? '1' : '0';
        out += ',';
        out += r.resolution_ok ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string sweep_meta_json(const SweepResult& s) {
    json j;
    j["a"] = s.a;
    j["a_star"] = s.a_star;
    j["p"] = s.p;
    j["lambda0"] = s.lambda0;
    j["aborted"] = s.aborted;
    j["rows"] = json::array();
    for (const auto& r : s.rows)
        j["rows"].push_back({{"b", r.b}, {"trial_energy", r.trial_energy},
                             {"decay_c", r.decay_c}});
    return j.dump(2) + "\n";
}

SweepResult parse_sweep_csv(const std::string& csv, const std::string* meta_json) {
    SweepResult s;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("sweep csv: empty");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != 15) throw std::invalid_argument("sweep csv: wrong column count");
        SweepRow r;
        r.b = std::stod(cells[0]);
        r.energy = std::stod(cells[1]);
        r.theta = std::stod(cells[2]);
        r.l4 = std::stod(cells[3]);
        r.v_integral = std::stod(cells[4]);
        r.mu = std::stod(cells[5]);
        r.z = {std::stod(cells[6]), std::stod(cells[7])};
        r.eps_meas = std::stod(cells[8]);
        r.eps_theory = std::stod(cells[9]);
        r.l2_dist = std::stod(cells[10]);
        r.h1_dist = std::stod(cells[11]);
        r.iters = std::stoi(cells[12]);
        r.converged = cells[13] == "1";
        r.resolution_ok = cells[14] == "1";
        r.trial_energy = r.decay_c = std::numeric_limits<double>::quiet_NaN();
        s.rows.push_back(r);
    }
    if (meta_json && !meta_json->empty()) {
        json j = json::parse(*meta_json);
        s.a = j.value("a", 0.0);
        s.a_star = j.value("a_star", 0.0);
        s.p = j.value("p", 0.0);
        s.lambda0 = j.value("lambda0", 0.0);
        s.aborted = j.value("aborted", false);
        if (j.contains("rows") && j["rows"].size() == s.rows.size())
            for (size_t i = 0; i < s.rows.size(); ++i) {
                s.rows[i].trial_energy = j["rows"][i].value("trial_energy", 0.0);
                s.rows[i].decay_c = j["rows"][i].value("decay_c", 0.0);
            }
    }
    return s;
}

std::string fit_json(const FitResult& f, const std::string& mode) {
    json j;
    j["mode"] = mode;
    j["slope"] = f.slope;
    j["prefactor"] = f.prefactor;
    j["residual_rms"] = f.residual_rms;
    j["n_points"] = f.n_points;
    return j.dump(2) + "\n";
}

std::string report_json(const DiagnosticsReport& r) {
    json j;
    j["a"] = r.a;
    j["a_star"] = r.a_star;
    j["p"] = r.p;
    j["lambda0"] = r.lambda0;
    j["all_passed"] = r.all_passed();
    j["checks"] = json::array();
    for (const auto& c : r.checks)
        j["checks"].push_back({{"name", c.name},
                               {"verdict", to_string(c.verdict)},
                               {"measured", c.measured},
                               {"target", c.target},
                               {"tolerance", c.tolerance},
                               {"note", c.note}});
    return j.dump(2) + "\n";
}

double parse_a_value(const std::string& text, std::optional<double> a_star) {
    auto pos = text.find("astar");
    if (pos == std::string::npos) return std::stod(text);
    if (!a_star)
        throw std::invalid_argument("'astar' used but no ground-state constants available");
    std::string mult = text.substr(0, pos);
    double m = mult.empty() ? 1.0 : std::stod(mult);
    return m * *a_star;
}

std::optional<uint64_t> file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= (unsigned char)c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace kirchhoff
