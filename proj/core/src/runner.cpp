#include "cosmowave/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "cosmowave/energies.hpp"
#include "cosmowave/homogeneous.hpp"
#include "cosmowave/report.hpp"

namespace cosmowave {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + what);
}

template <class T>
T get(const YAML::Node& n, const std::string& path) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        bad(path, "has the wrong type");
    }
}

template <class T>
T get_or(const YAML::Node& parent, const char* key, const std::string& path, T fallback) {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    return get<T>(n, path + "." + key);
}

void check_keys(const YAML::Node& n, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) bad(path, "must be a mapping");
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) bad(path + "." + key, "unknown key");
    }
}

Json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            Json j = Json::object();
            for (const auto& kv : n) j[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return j;
        }
        case YAML::NodeType::Sequence: {
            Json j = Json::array();
            for (const auto& v : n) j.push_back(yaml_to_json(v));
            return j;
        }
        case YAML::NodeType::Scalar: {
            const std::string s = n.Scalar();
            if (n.Tag() == "!") return s;  // quoted
            try {
                std::size_t used = 0;
                const long long i = std::stoll(s, &used);
                if (used == s.size()) return i;
            } catch (...) {
            }
            try {
                std::size_t used = 0;
                const double d = std::stod(s, &used);
                if (used == s.size()) return d;
            } catch (...) {
            }
            if (s == "true") return true;
            if (s == "false") return false;
            return s;
        }
        default: return nullptr;
    }
}

std::array<int, 3> get_k(const YAML::Node& n, const std::string& path) {
    if (!n || !n.IsSequence() || n.size() != 3) bad(path, "must be a list of three integers");
    return {get<int>(n[0], path + "[0]"), get<int>(n[1], path + "[1]"), get<int>(n[2], path + "[2]")};
}

ProfileMethod parse_method(const std::string& s, const std::string& path) {
    if (s == "rescale") return ProfileMethod::Rescale;
    if (s == "stiff") return ProfileMethod::StiffIntegral;
    bad(path, "must be rescale or stiff");
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Error context: which pipeline stage failed.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        std::string_view msg = e.what();
        const std::string_view code = to_string(e.code());
        if (msg.starts_with(code) && msg.substr(code.size()).starts_with(": ")) msg.remove_prefix(code.size() + 2);
        throw Error(e.code(), std::string(name) + ": " + std::string(msg));
    }
}

}  // namespace

Scenario parse_scenario(const std::string& text, const fs::path& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("scenario: ") + e.what());
    }
    if (!root || !root.IsMap()) bad("scenario", "must be a mapping");
    check_keys(root, "scenario",
               {"cosmology", "background", "metric", "initial_data", "stops", "evolution", "diagnostics", "criteria",
                "sweep", "seed", "output"});
    Scenario s;

    const YAML::Node cn = root["cosmology"];
    if (!cn) bad("cosmology", "is required");
    check_keys(cn, "cosmology", {"type", "gamma", "B"});
    const int type = get_or<int>(cn, "type", "cosmology", 0);
    if (type != 0 && type != -1) bad("cosmology.type", "must be 0 or -1");
    try {
        s.background.cosmology = Cosmology::make(type == 0 ? SpatialType::Type0 : SpatialType::TypeMinus1,
                                                 get_or<double>(cn, "gamma", "cosmology", 1.0),
                                                 get_or<double>(cn, "B", "cosmology", Cosmology{}.B));
    } catch (const Error& e) {
        bad("cosmology", e.what());
    }
    if (const YAML::Node b = root["background"]) {
        check_keys(b, "background", {"t_seed", "t_max", "tol"});
        s.background.t_seed = get_or<double>(b, "t_seed", "background", s.background.t_seed);
        s.background.t_max = get_or<double>(b, "t_max", "background", s.background.t_max);
        s.background.tol = get_or<double>(b, "tol", "background", s.background.tol);
    }

    const YAML::Node mn = root["metric"];
    if (!mn) bad("metric", "is required");
    if (mn["file"]) {
        check_keys(mn, "metric", {"file"});
        fs::path p = get<std::string>(mn["file"], "metric.file");
        if (p.is_relative()) p = base_dir / p;
        std::ifstream in(p);
        if (!in) bad("metric.file", "cannot open " + p.string());
        std::stringstream ss;
        ss << in.rdbuf();
        s.metric_json = ss.str();
    } else {
        check_keys(mn, "metric", {"kind", "n", "L", "phi_coeffs", "g"});
        s.metric_json = yaml_to_json(mn).dump();
    }
    try {
        (void)metric_from_json_text(s.metric_json);
    } catch (const Error& e) {
        bad("metric", e.what());
    }

    const YAML::Node dn = root["initial_data"];
    if (!dn) bad("initial_data", "is required");
    check_keys(dn, "initial_data", {"t0", "homogeneous", "fourier", "random_bandlimited"});
    s.t0 = get_or<double>(dn, "t0", "initial_data", 1.0);
    if (!(s.t0 > 0.0)) bad("initial_data.t0", "must be positive");
    if (const YAML::Node h = dn["homogeneous"]) {
        check_keys(h, "initial_data.homogeneous", {"C1", "C2"});
        s.data.homogeneous = std::pair{get_or<double>(h, "C1", "initial_data.homogeneous", 0.0),
                                       get_or<double>(h, "C2", "initial_data.homogeneous", 0.0)};
    }
    if (const YAML::Node f = dn["fourier"]) {
        if (!f.IsSequence()) bad("initial_data.fourier", "must be a list");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string path = "initial_data.fourier[" + std::to_string(i) + "]";
            check_keys(f[i], path, {"k", "psi_c", "psi_s", "psi_dot_c", "psi_dot_s"});
            ModeData m;
            m.k = get_k(f[i]["k"], path + ".k");
            m.psi_c = get_or<double>(f[i], "psi_c", path, 0.0);
            m.psi_s = get_or<double>(f[i], "psi_s", path, 0.0);
            m.psi_dot_c = get_or<double>(f[i], "psi_dot_c", path, 0.0);
            m.psi_dot_s = get_or<double>(f[i], "psi_dot_s", path, 0.0);
            s.data.fourier.push_back(m);
        }
    }
    if (const YAML::Node r = dn["random_bandlimited"]) {
        const std::string path = "initial_data.random_bandlimited";
        check_keys(r, path, {"kmax", "seed", "amplitude"});
        RandomBandlimited rb;
        rb.kmax = get_or<int>(r, "kmax", path, rb.kmax);
        rb.seed = get_or<std::uint64_t>(r, "seed", path, rb.seed);
        rb.amplitude = get_or<double>(r, "amplitude", path, rb.amplitude);
        s.data.random = rb;
    }

    const YAML::Node sn = root["stops"];
    if (!sn) bad("stops", "is required");
    if (sn.IsSequence()) {
        for (std::size_t i = 0; i < sn.size(); ++i) s.stops.push_back(get<double>(sn[i], "stops[" + std::to_string(i) + "]"));
    } else {
        check_keys(sn, "stops", {"to", "per_decade"});
        const double to = get_or<double>(sn, "to", "stops", 0.0);
        const int per = get_or<int>(sn, "per_decade", "stops", 8);
        if (!(to > 0.0 && to < s.t0)) bad("stops.to", "must lie in (0, t0)");
        if (per < 1) bad("stops.per_decade", "must be positive");
        s.stops = geometric_stops(s.t0, to, per);
    }
    if (s.stops.empty()) bad("stops", "must not be empty");
    for (std::size_t i = 0; i < s.stops.size(); ++i) {
        if (s.stops[i] > s.t0 || (i > 0 && !(s.stops[i] < s.stops[i - 1]))) {
            bad("stops", "must be strictly decreasing and not exceed t0");
        }
    }

    if (const YAML::Node e = root["evolution"]) {
        check_keys(e, "evolution", {"tol", "threads", "curved_t_min", "cfl_factor"});
        s.evolve.tol = get_or<double>(e, "tol", "evolution", s.evolve.tol);
        s.evolve.threads = get_or<int>(e, "threads", "evolution", s.evolve.threads);
        s.evolve.curved_t_min = get_or<double>(e, "curved_t_min", "evolution", s.evolve.curved_t_min);
        s.evolve.cfl_factor = get_or<double>(e, "cfl_factor", "evolution", s.evolve.cfl_factor);
    }

    if (const YAML::Node d = root["diagnostics"]) {
        const std::string path = "diagnostics";
        check_keys(d, path,
                   {"energies", "Nmax", "rescaled", "epsilon", "flux", "profile", "limit", "energy_convergence",
                    "monotonicity_tol", "flux_tol", "limit_tol"});
        DiagnosticsToggles& t = s.diagnostics;
        t.energies = get_or<bool>(d, "energies", path, t.energies);
        t.Nmax = get_or<int>(d, "Nmax", path, t.Nmax);
        if (t.Nmax < 0 || t.Nmax > 6) bad(path + ".Nmax", "must lie in [0, 6]");
        if (d["rescaled"]) t.rescaled = get<bool>(d["rescaled"], path + ".rescaled");
        t.epsilon = get_or<double>(d, "epsilon", path, t.epsilon);
        t.flux = get_or<bool>(d, "flux", path, t.flux);
        if (d["profile"]) {
            const std::string m = get<std::string>(d["profile"], path + ".profile");
            if (m != "none") t.profile = parse_method(m, path + ".profile");
        }
        t.limit = get_or<bool>(d, "limit", path, t.limit);
        t.energy_convergence = get_or<bool>(d, "energy_convergence", path, t.energy_convergence);
        t.monotonicity_tol = get_or<double>(d, "monotonicity_tol", path, t.monotonicity_tol);
        t.flux_tol = get_or<double>(d, "flux_tol", path, t.flux_tol);
        t.limit_tol = get_or<double>(d, "limit_tol", path, t.limit_tol);
        if ((t.limit || t.energy_convergence) && !t.profile) bad(path, "limit checks need a profile method");
    }

    if (const YAML::Node c = root["criteria"]) {
        if (!c.IsSequence()) bad("criteria", "must be a list");
        for (std::size_t i = 0; i < c.size(); ++i) {
            const std::string path = "criteria[" + std::to_string(i) + "]";
            check_keys(c[i], path, {"name", "epsilon", "amplitude", "slack"});
            CriterionRequest r;
            if (!c[i]["name"]) bad(path + ".name", "is required");
            try {
                r.criterion = criterion_from_name(get<std::string>(c[i]["name"], path + ".name"));
            } catch (const Error& e) {
                bad(path + ".name", e.what());
            }
            r.epsilon = get_or<double>(c[i], "epsilon", path, r.criterion == Criterion::PointwiseNonStiff ? 0.0 : 0.5);
            if (c[i]["amplitude"]) r.amplitude = get<double>(c[i]["amplitude"], path + ".amplitude");
            r.slack = get_or<double>(c[i], "slack", path, r.slack);
            s.criteria.push_back(r);
        }
    }
    if (const YAML::Node w = root["sweep"]) {
        check_keys(w, "sweep", {"k", "deltas"});
        Sweep sw;
        if (w["k"]) sw.k = get_k(w["k"], "sweep.k");
        const YAML::Node ds = w["deltas"];
        if (!ds || !ds.IsSequence()) bad("sweep.deltas", "must be a list");
        for (std::size_t i = 0; i < ds.size(); ++i) sw.deltas.push_back(get<double>(ds[i], "sweep.deltas[" + std::to_string(i) + "]"));
        s.sweep = sw;
    }
    if (root["seed"]) s.seed = get<std::uint64_t>(root["seed"], "seed");
    if (const YAML::Node o = root["output"]) {
        check_keys(o, "output", {"dir"});
        s.out_dir = get_or<std::string>(o, "dir", "output", "out");
    }
    return s;
}

Scenario load_scenario(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open scenario " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.parent_path());
}

std::shared_ptr<const SpatialMetric> scenario_metric(const Scenario& s) {
    return std::make_shared<const SpatialMetric>(metric_from_json_text(s.metric_json));
}

FieldState scenario_initial_state(const Scenario& s, const Background& bg) {
    InitialDataSpec data = s.data;
    if (s.seed && data.random) data.random->seed = *s.seed;
    return make_initial_data(data, bg, scenario_metric(s), s.t0);
}

RunResult run_scenario(const Scenario& s) {
    RunResult result;
    std::error_code ec;
    fs::create_directories(s.out_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + s.out_dir.string() + ": " + ec.message());

    const Background bg = stage("background", [&] { return s.background.build(); });
    const FieldState s0 = stage("initial data", [&] { return scenario_initial_state(s, bg); });
    const auto traj = stage("evolution", [&] { return sample_trajectory(s0, s.stops, s.evolve); });
    const DiagnosticsToggles& d = s.diagnostics;
    const bool stiff = bg.cosmology().stiff();

    Json summary;
    summary["cosmology"] = {{"type", bg.type() == SpatialType::Type0 ? 0 : -1},
                            {"gamma", bg.gamma()},
                            {"B", bg.cosmology().B}};
    summary["metric"] = Json::parse(s.metric_json);
    summary["t0"] = s.t0;
    summary["stops"] = s.stops;

    {
        std::ofstream csv(s.out_dir / "stops.csv");
        csv << "t,a,max_abs_psi,max_abs_psi_dot\n";
        for (const auto& st : traj) {
            csv << num(st.t) << ',' << num(bg.a(st.t)) << ',' << num(st.psi.max_abs()) << ','
                << num(st.psi_dot.max_abs()) << '\n';
        }
    }

    if (d.energies) {
        // type 0 stiff: log t vanishes at t = 1
        const bool can_rescale = !(stiff && bg.type() == SpatialType::Type0 && s.t0 >= 1.0);
        const bool rescaled = d.rescaled.value_or(can_rescale);
        const double eps = d.epsilon > 0.0 ? d.epsilon : default_epsilon(bg.gamma());
        std::vector<EnergyReport> reports = stage("energies", [&] {
            std::vector<EnergyReport> out;
            for (const auto& st : traj) out.push_back(energy_report(st, d.Nmax, rescaled, eps));
            return out;
        });
        const auto mono = monotonicity_violations(reports, d.monotonicity_tol);
        const auto seq = rescaled ? sequence_violations(reports, d.monotonicity_tol) : std::vector<Violation>{};
        std::vector<Violation> seq_rescaled;
        for (const auto& v : seq) {
            if (v.quantity != "a6E") seq_rescaled.push_back(v);
        }
        std::optional<double> flux;
        if (d.flux && traj.size() >= 3) flux = stage("flux balance", [&] { return flux_balance_residual(traj); });
        summary["energies"] = energy_document(reports, mono, seq_rescaled, flux);
        if (!mono.empty()) result.failures.push_back("energy monotonicity violated at " + std::to_string(mono.size()) + " stops");
        if (!seq_rescaled.empty()) {
            result.failures.push_back("rescaled energy increased at " + std::to_string(seq_rescaled.size()) + " stops");
        }
        if (flux && *flux > d.flux_tol) result.failures.push_back("flux residual " + num(*flux) + " above tolerance");

        std::ofstream csv(s.out_dir / "energies.csv");
        csv << "t,F";
        for (int N = 0; N <= d.Nmax; ++N) csv << ",a6E" << N;
        if (rescaled) {
            for (int N = 0; N <= d.Nmax; ++N) csv << ",weighted_rescaled_E" << N;
        }
        csv << '\n';
        for (const auto& r : reports) {
            csv << num(r.t) << ',' << num(r.F);
            for (double v : r.weightedE) csv << ',' << num(v);
            for (double v : r.weightedRescaledE) csv << ',' << num(v);
            csv << '\n';
        }
    }

    if (d.profile) {
        const BlowupProfile p = stage("profile", [&] { return extract_profile(traj, *d.profile, {d.Nmax, s.evolve.tol}); });
        summary["profile"] = profile_json(p, *s0.metric);
        write_profile(s.out_dir / "profile", p, *s0.metric);
        std::ofstream csv(s.out_dir / "profile_convergence.csv");
        csv << "t,sup_abs_quotient_minus_A\n";
        for (const auto& st : traj) {
            const double h = psi_hom_basis(bg, st.t);
            csv << num(st.t) << ',' << num(((1.0 / h) * st.psi - p.A).max_abs()) << '\n';
        }
        if (d.limit) {
            const LimitCheck lc = stage("limit identity", [&] { return limit_equality_check(traj, p); });
            summary["limit"] = to_json(lc);
            if (lc.residual > d.limit_tol) result.failures.push_back("limit residual " + num(lc.residual) + " above tolerance");
        }
        if (d.energy_convergence) {
            summary["energy_convergence"] =
                to_json(stage("energy convergence", [&] { return energy_convergence_check(traj, p); }));
        }
    }

    auto evaluate = [&](const CriterionRequest& r, const FieldState& data) {
        switch (r.criterion) {
            case Criterion::StiffInclusivePointwise: return check_stiff_inclusive(data, r.amplitude);
            case Criterion::StiffInclusiveSimplified: return check_stiff_simplified(data, r.amplitude, r.slack);
            case Criterion::GlobalType0: return check_global_type0(data, r.epsilon);
            case Criterion::GlobalTypeMinus1: return check_global_type_minus1(data, r.epsilon);
            case Criterion::PointwiseNonStiff: return check_pointwise_nonstiff(data, r.amplitude, r.epsilon);
        }
        throw Error(ErrorCode::InvalidArgument, "unknown criterion");
    };
    if (!s.criteria.empty()) {
        Json arr = Json::array();
        for (const auto& r : s.criteria) arr.push_back(to_json(stage("criteria", [&] { return evaluate(r, s0); })));
        summary["criteria"] = arr;
    }
    if (s.sweep && !s.criteria.empty()) {
        std::ofstream csv(s.out_dir / "criteria_sweep.csv");
        csv << "delta,criterion,margin,holds\n";
        Json arr = Json::array();
        for (double delta : s.sweep->deltas) {
            InitialDataSpec data = s.data;
            if (s.seed && data.random) data.random->seed = *s.seed;
            data.fourier.push_back({s.sweep->k, delta, 0.0, 0.0, 0.0});
            const FieldState sd = stage("sweep", [&] { return make_initial_data(data, bg, s0.metric, s.t0); });
            for (const auto& r : s.criteria) {
                const CriteriaReport rep = stage("sweep", [&] { return evaluate(r, sd); });
                csv << num(delta) << ',' << criterion_name(rep.criterion) << ',' << num(rep.margin) << ','
                    << (rep.holds ? 1 : 0) << '\n';
                arr.push_back({{"delta", delta}, {"criterion", criterion_name(rep.criterion)}, {"margin", rep.margin},
                               {"holds", rep.holds}});
            }
        }
        summary["sweep"] = arr;
    }

    result.status = result.failures.empty() ? 0 : 2;
    summary["failures"] = result.failures;
    summary["status"] = result.status;
    write_text(s.out_dir / "summary.json", summary.dump(2) + "\n");
    return result;
}

}  // namespace cosmowave
