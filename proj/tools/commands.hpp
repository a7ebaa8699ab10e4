#pragma once

// Command implementations behind the mcp executable. Each returns the exit
// status and writes to the given streams, so tests can drive them directly.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mcp/mcp.hpp"

namespace mcp::cli {

enum Exit : int { Ok = 0, InvalidModel = 1, InputError = 2, Ambiguous = 3, Aborted = 4 };

struct CliError : std::runtime_error {
    CliError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

struct RunConfig {
    std::string model;
    std::string perf;
    std::string machine;
    int cycles = 1;
    int jobs = 1;
    std::uint64_t seed = 1;
    int cores = 0;
    double theta_es = 0.9;
    double r_seq = 0.01;
    double slack_tol = 0;
    double quality = 0.9;
    std::optional<double> alpha;
    std::optional<double> energy_budget;
    std::string out_dir = ".";
    std::optional<std::string> pattern;
    std::optional<std::string> primary;
    std::optional<std::string> mode;  // ES: sequential or interleaved, default chosen by the planner
    std::map<std::string, int> instances;

    // HMC
    bool precompute = false;
    int precompute_slots = 1;
    double delta_reuse = 0;
    bool interpolate = true;
    std::string hmc_queries;
    double hmc_latency = 0;

    // RC
    int replica_cores = 1;
    int master_cores = 1;
};

namespace detail {

inline std::string slurp(const std::string& path) {
    try {
        return read_file(path);
    } catch (const std::runtime_error& e) {
        throw CliError(InputError, e.what());
    }
}

inline ParsedModel load_model(const std::string& path) {
    auto text = slurp(path);
    try {
        return parse_model_source(text);
    } catch (const ParseError& e) {
        throw CliError(InputError, path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                                       e.message());
    }
}

/// Parses, validates and deadlock-checks; any finding is reported line by line.
inline MultiscaleModel load_valid_model(const std::string& path, std::ostream& err) {
    auto parsed = load_model(path);
    auto diags = validate_model(parsed.model);
    for (const auto& d : diags) err << path << ":" << parsed.lines.line_of(d) << ": " << d.message << "\n";
    auto dl = detect_deadlock(parsed.model);
    if (dl) err << path << ":" << parsed.lines.model_line << ": " << dl.description << "\n";
    if (!diags.empty() || dl) throw CliError(InvalidModel, "model is invalid");
    return parsed.model;
}

inline std::map<std::string, PerfModel> load_perf(const std::string& path) {
    if (path.empty()) throw CliError(InputError, "a performance file is required (--perf)");
    try {
        return parse_perf_file(slurp(path));
    } catch (const ParseError& e) {
        throw CliError(InputError, path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) + ": " +
                                       e.message());
    }
}

inline MachineModel load_machine(const std::string& path) {
    if (path.empty()) throw CliError(InputError, "a machine file is required (--machine)");
    try {
        return parse_machine_file(slurp(path));
    } catch (const ParseError& e) {
        throw CliError(InputError, path + ": " + e.message());
    }
}

/// Resolves each submodel's perf= reference, falling back to its id.
inline std::map<std::string, PerfModel> perf_by_submodel(const MultiscaleModel& m,
                                                         const std::map<std::string, PerfModel>& refs) {
    std::map<std::string, PerfModel> out;
    for (const auto& s : m.submodels) {
        auto it = refs.find(s.perf.value_or(s.id));
        if (it != refs.end()) out.emplace(s.id, it->second);
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CliError(InputError, "cannot write '" + path.string() + "'");
    f << text;
}

inline std::string num(double v) { return format_number(v); }

}  // namespace detail

struct Pipeline {
    MultiscaleModel model;
    std::map<std::string, PerfModel> perf;
    MachineModel machine;
    Classification classification;
    PatternEmbedding embedding;
    TaskGraph graph;
    ExecutionPlan plan;
};

/// `id=n` items for dynamic submodels.
inline std::map<std::string, int> parse_instances(const std::vector<std::string>& items) {
    std::map<std::string, int> out;
    for (const auto& item : items) {
        auto eq = item.find('=');
        int n = 0;
        try {
            if (eq == std::string::npos) throw std::invalid_argument(item);
            n = std::stoi(item.substr(eq + 1));
        } catch (const std::logic_error&) {
            throw CliError(InputError, "expected id=n for --instances, got '" + item + "'");
        }
        if (n < 1) throw CliError(InputError, "instance count must be >= 1 in '" + item + "'");
        out[item.substr(0, eq)] = n;
    }
    return out;
}

inline PlanOptions plan_options(const RunConfig& cfg) {
    PlanOptions o;
    o.thresholds.r_seq = cfg.r_seq;
    o.slack_tol = cfg.slack_tol;
    o.cores = cfg.cores;
    o.precompute = cfg.precompute;
    o.precompute_slots = cfg.precompute_slots;
    o.replica_cores = cfg.replica_cores;
    o.master_cores = cfg.master_cores;
    o.quality = cfg.quality;
    o.energy_budget_j = cfg.energy_budget;
    return o;
}

/// Loads the inputs, classifies, unfolds the workload and plans it.
inline Pipeline build_pipeline(const RunConfig& cfg, MachineModel machine, std::ostream& err,
                               const PlanOptions& opts) {
    Pipeline p;
    p.model = detail::load_valid_model(cfg.model, err);
    p.perf = detail::perf_by_submodel(p.model, detail::load_perf(cfg.perf));
    p.machine = std::move(machine);
    if (cfg.alpha) p.machine.energy.alpha = *cfg.alpha;

    std::map<std::string, double> costs;
    for (const auto& [id, pm] : p.perf) costs[id] = eval_time(pm, 1);
    if (cfg.pattern) {
        auto k = pattern_kind_from_string(*cfg.pattern);
        if (!k) throw CliError(InputError, "unknown pattern '" + *cfg.pattern + "'");
        p.classification = classify(p.model, costs, cfg.theta_es);
        p.classification.status = Classification::Status::Classified;
        p.classification.kind = *k;
    } else {
        p.classification = classify(p.model, costs, cfg.theta_es);
        if (!p.classification.ok()) {
            err << "classification " << (p.classification.status == Classification::Status::Ambiguous ? "ambiguous" : "failed")
                << ": " << p.classification.detail << "\n";
            throw CliError(Ambiguous, "no pattern selected; use --pattern");
        }
    }
    const PatternKind kind = *p.classification.kind;

    for (const auto& s : p.model.submodels) {
        if (s.multiplicity.is_dynamic() && !cfg.instances.count(s.id))
            throw CliError(InputError, "dynamic submodel '" + s.id + "' needs --instances " + s.id + "=<n>");
    }
    try {
        if (kind == PatternKind::ES) {
            std::string primary = cfg.primary.value_or(p.classification.primary);
            if (primary.empty()) throw CliError(InputError, "no primary submodel; use --primary");
            auto unit = unfold(p.model, 1, cfg.instances);
            p.embedding = embed_es(unit, p.model, primary);
            auto first = opts;
            if (cfg.mode) {
                if (*cfg.mode == "sequential") {
                    first.force_mode = ExecMode::Sequential;
                } else if (*cfg.mode == "interleaved") {
                    first.force_mode = ExecMode::Interleaved;
                } else {
                    throw CliError(InputError, "unknown mode '" + *cfg.mode + "'");
                }
            }
            auto probe = plan(p.embedding, unit, p.perf, p.machine, first);
            p.graph = es_workload(p.model, cfg.jobs, probe.mode, cfg.instances);
            auto o = opts;
            o.force_mode = probe.mode;
            p.plan = plan(p.embedding, p.graph, p.perf, p.machine, o);
        } else {
            p.graph = unfold(p.model, cfg.cycles, cfg.instances);
            p.embedding = kind == PatternKind::HMC ? embed_hmc(p.graph, p.model) : embed_rc(p.graph, p.model, kind);
            p.plan = plan(p.embedding, p.graph, p.perf, p.machine, opts);
        }
    } catch (const PlanError& e) {
        throw CliError(InvalidModel, e.what());
    } catch (const std::invalid_argument& e) {
        throw CliError(InputError, e.what());
    }
    return p;
}

inline std::string plan_summary(const ExecutionPlan& p) {
    std::ostringstream s;
    s << "pattern=" << to_string(p.pattern) << " mode=" << to_string(p.mode);
    if (p.split) s << " P1=" << p.split->p1 << " P2=" << p.split->p2;
    if (p.pattern == PatternKind::HMC)
        s << " macro=" << p.macro_cores << " micro_slots=" << p.micro_slots << " precompute=" << p.precompute_slots;
    if (is_replica_computing(p.pattern))
        s << " replicas=" << p.n_replicas << " slots=" << p.replica_slots << " waves=" << p.waves;
    s << " period=" << detail::num(p.predicted_period);
    return s.str();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const CliError& e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    } catch (const SimulationAborted& e) {
        err << "error: simulation aborted: " << e.what() << "\n";
        return Aborted;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return InputError;
    }
}

inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        auto m = detail::load_valid_model(path, err);
        out << "ok: " << m.name << " (" << m.submodels.size() << " submodels, " << m.couplings.size()
            << " couplings)\n";
        return Ok;
    });
}

inline int cmd_graph(const std::string& path, int cycles, const std::string& dot_path,
                     const std::map<std::string, int>& instances, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (cycles < 1) throw CliError(InputError, "cycles must be >= 1");
        auto m = detail::load_valid_model(path, err);
        TaskGraph g;
        try {
            g = unfold(m, cycles, instances);
        } catch (const std::invalid_argument& e) {
            throw CliError(InputError, e.what());
        }
        if (!dot_path.empty()) detail::write_text(dot_path, to_dot(g));
        out << "nodes=" << g.size() << " edges=" << g.edges().size() << "\n";
        return Ok;
    });
}

inline int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        auto p = build_pipeline(cfg, detail::load_machine(cfg.machine), err, plan_options(cfg));
        for (const auto& [name, text] : emit_middleware_config(p.plan))
            detail::write_text(std::filesystem::path(cfg.out_dir) / name, text);
        out << plan_summary(p.plan) << "\n";
        if (p.plan.efficiency) {
            out << "efficiency_exact=" << detail::num(p.plan.efficiency->exact)
                << " efficiency_eq2=" << detail::num(p.plan.efficiency->approx) << "\n";
        }
        return Ok;
    });
}

/// HMC query file: one `<task-id> <x>[,<y>...]` per line.
inline std::map<NodeId, std::vector<double>> load_queries(const std::string& path) {
    std::map<NodeId, std::vector<double>> out;
    std::istringstream in(detail::slurp(path));
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        std::istringstream ls(line);
        std::string id, coords;
        if (!(ls >> id)) continue;
        if (!(ls >> coords)) throw CliError(InputError, path + ":" + std::to_string(no) + ": expected coordinates");
        std::vector<double> pt;
        std::stringstream cs(coords);
        std::string c;
        while (std::getline(cs, c, ',')) {
            try {
                pt.push_back(std::stod(c));
            } catch (const std::exception&) {
                throw CliError(InputError, path + ":" + std::to_string(no) + ": bad coordinate '" + c + "'");
            }
        }
        out[id] = pt;
    }
    return out;
}

inline SimOptions sim_options(const RunConfig& cfg) {
    SimOptions so;
    so.hmc_latency = cfg.hmc_latency;
    if (!cfg.hmc_queries.empty()) {
        so.hmc_queries = load_queries(cfg.hmc_queries);
        HmcPolicy pol;
        pol.delta_reuse = cfg.delta_reuse;
        pol.interpolation = cfg.interpolate ? Interpolation::LinearWithinHull : Interpolation::None;
        so.hmc_db = HmcDatabase(pol);
    }
    return so;
}

inline std::string sim_summary(const SimReport& r) {
    std::ostringstream s;
    s << "makespan=" << detail::num(r.makespan) << " energy=" << detail::num(r.energy_joules)
      << " efficiency=" << detail::num(r.efficiency_observed) << " failures=" << r.failures.size();
    return s.str();
}

inline int cmd_simulate(const RunConfig& cfg, const std::string& json_path, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        auto p = build_pipeline(cfg, detail::load_machine(cfg.machine), err, plan_options(cfg));
        SimReport r;
        try {
            r = simulate(p.plan, p.graph, p.perf, p.machine, cfg.seed, sim_options(cfg));
        } catch (const SimulationAborted& e) {
            err << "error: simulation aborted at task '" << e.task() << "': " << e.what() << "\n";
            return static_cast<int>(Aborted);
        }
        const auto json = report_json(r);
        if (json_path == "-") {
            out << json;
        } else {
            detail::write_text(json_path.empty() ? std::filesystem::path(cfg.out_dir) / "report.json"
                                                  : std::filesystem::path(json_path),
                               json);
        }
        out << sim_summary(r) << "\n";
        return Ok;
    });
}

struct SweepSpec {
    std::string name;  // P, f or lambda
    std::vector<double> values;
};

/// `P=2..32`, `P=4,8,16`, `f=0.5,1`, `lambda=0,1e-4`.
inline SweepSpec parse_sweep(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw CliError(InputError, "sweep expects <param>=<values>");
    SweepSpec s{text.substr(0, eq), {}};
    if (s.name != "P" && s.name != "f" && s.name != "lambda")
        throw CliError(InputError, "unknown sweep parameter '" + s.name + "' (P, f or lambda)");
    const auto rest = text.substr(eq + 1);
    try {
        if (auto dots = rest.find(".."); dots != std::string::npos) {
            if (s.name != "P") throw CliError(InputError, "ranges are only supported for P");
            const int lo = std::stoi(rest.substr(0, dots)), hi = std::stoi(rest.substr(dots + 2));
            if (lo < 1 || hi < lo) throw CliError(InputError, "bad range '" + rest + "'");
            for (int v = lo; v <= hi; ++v) s.values.push_back(v);
        } else {
            std::stringstream ss(rest);
            std::string item;
            while (std::getline(ss, item, ',')) s.values.push_back(std::stod(item));
        }
    } catch (const std::logic_error&) {
        throw CliError(InputError, "bad sweep values '" + rest + "'");
    }
    if (s.values.empty()) throw CliError(InputError, "sweep needs at least one value");
    std::sort(s.values.begin(), s.values.end());
    return s;
}

inline int cmd_sweep(const RunConfig& cfg, const std::string& param, const std::string& csv_path, std::ostream& out,
                     std::ostream& err) {
    return guarded(err, [&]() -> int {
        const auto sweep = parse_sweep(param);
        const auto base = detail::load_machine(cfg.machine);
        std::ostringstream csv;
        csv << "param,mode,period,makespan,energy,efficiency_exact,efficiency_eq2\n";
        for (double v : sweep.values) {
            auto machine = base;
            auto opts = plan_options(cfg);
            std::optional<double> freq;
            if (sweep.name == "P") {
                const int procs = static_cast<int>(v);
                if (procs < 1 || procs != v) throw CliError(InputError, "P must be a positive integer");
                machine.nodes = std::max(machine.nodes, (procs + machine.cores_per_node - 1) / machine.cores_per_node);
                opts.cores = procs;
            } else if (sweep.name == "lambda") {
                if (!(v >= 0)) throw CliError(InputError, "lambda must be nonnegative");
                machine.lambda_core = v;
            } else {
                if (!machine.energy.permits(v)) throw CliError(InputError, "frequency " + detail::num(v) + " is not a machine level");
                freq = v;
                opts.optimize_energy = false;
            }
            auto p = build_pipeline(cfg, machine, err, opts);
            double period = p.plan.predicted_period;
            if (freq) {
                for (auto& [id, a] : p.plan.assignments) a.frequency = *freq;
                period /= *freq;
            }
            auto r = simulate(p.plan, p.graph, p.perf, p.machine, cfg.seed, sim_options(cfg));
            const double exact = p.plan.efficiency ? p.plan.efficiency->exact : r.efficiency_observed;
            csv << detail::num(v) << ',' << to_string(p.plan.mode) << ',' << detail::num(period) << ','
                << detail::num(r.makespan) << ',' << detail::num(r.energy_joules) << ',' << detail::num(exact) << ','
                << (p.plan.efficiency ? detail::num(p.plan.efficiency->approx) : std::string()) << '\n';
        }
        if (csv_path.empty() || csv_path == "-") {
            out << csv.str();
        } else {
            detail::write_text(csv_path, csv.str());
            out << "rows=" << sweep.values.size() << "\n";
        }
        return Ok;
    });
}

}  // namespace mcp::cli
