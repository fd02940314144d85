// dcnc - command-line front end for the simulator, sweeps and the capacity oracle.
#include "dcnc/capacity.hpp"
#include "dcnc/config.hpp"
#include "dcnc/engine.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace dcnc;

struct CommonFlags {
    std::string config;
    std::string preset;
    std::string policy;
    std::optional<double> V;
    std::optional<double> eta;
    std::optional<long long> slots;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
    std::optional<long long> record_every;
    std::string out;
    std::string certificate;
    std::vector<double> values;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "JSON experiment configuration");
    cmd->add_option("--preset", f.preset, "abilene-onoff or abilene-multilevel");
    cmd->add_option("--policy", f.policy, "dcnc-l, dcnc-q, edcnc-l, edcnc-q or randomized");
    cmd->add_option("--V", f.V, "cost emphasis");
    cmd->add_option("--eta", f.eta, "STPD bias weight");
    cmd->add_option("--slots", f.slots, "horizon in slots");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--lambda", f.lambda, "uniform per-client rate");
    cmd->add_option("--record-every", f.record_every, "trace record period in slots");
    cmd->add_option("--out", f.out, "output file");
    cmd->add_option("--certificate", f.certificate, "capacity certificate JSON for the randomized policy");
}

ExperimentConfig resolve(const CommonFlags& f) {
    if (!f.config.empty() && !f.preset.empty())
        throw ConfigError("--config and --preset are mutually exclusive");
    ExperimentConfig cfg;
    if (!f.config.empty())
        cfg = load_config(f.config);
    else if (!f.preset.empty())
        cfg = preset_config(f.preset);
    else
        throw ConfigError("one of --config or --preset is required");
    if (!f.policy.empty())
        cfg.policy.kind = parse_policy_kind(f.policy);
    if (f.V)
        cfg.policy.V = *f.V;
    if (f.eta)
        cfg.policy.eta = *f.eta;
    if (f.seed)
        cfg.policy.seed = *f.seed;
    if (f.slots) {
        if (*f.slots < 1)
            throw ConfigError("--slots must be at least 1");
        cfg.slots = *f.slots;
    }
    if (f.record_every)
        cfg.record_every = *f.record_every;
    if (f.lambda) {
        if (!(*f.lambda >= 0.0))
            throw ConfigError("--lambda must be nonnegative");
        cfg.arrivals.rate = *f.lambda;
        std::fill(cfg.client_rates.begin(), cfg.client_rates.end(), std::nullopt);
    }
    cfg.policy.validate();
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw ConfigError("cannot write " + path);
    return os;
}

std::optional<CapacityCertificate> certificate_for(const ExperimentConfig& cfg, const Scenario& s,
                                                   const ArrivalModel& a, const std::string& path) {
    if (cfg.policy.kind != PolicyKind::randomized)
        return std::nullopt;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open " + path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& ex) {
            throw ConfigError(path + ": " + ex.what());
        }
        return certificate_from_json(s.network, s.commodities, doc);
    }
    CapacityCertificate cert = min_cost(s.network, s.commodities, s.clients, a.rates);
    if (!cert.feasible)
        throw ConfigError("arrival rates lie outside the capacity region");
    return cert;
}

int cmd_run(const CommonFlags& f, bool procmap_only) {
    const ExperimentConfig cfg = resolve(f);
    const Scenario s = cfg.scenario();
    const ArrivalModel a = cfg.arrival_model(s);
    const auto cert = certificate_for(cfg, s, a, f.certificate.empty() ? cfg.outputs.certificate : f.certificate);
    const Trace tr = run(s, a, cfg.policy, cfg.run_options(), cert);
    if (procmap_only) {
        const std::string path = f.out.empty() ? cfg.outputs.procmap : f.out;
        const auto map = processing_map(s, tr);
        if (path.empty()) {
            write_processing_map_csv(std::cout, map);
        } else {
            auto os = open_out(path);
            write_processing_map_csv(os, map);
        }
    } else {
        const std::string path = f.out.empty() ? cfg.outputs.trace : f.out;
        if (!path.empty()) {
            auto os = open_out(path);
            write_trace_csv(os, tr);
        }
        if (!cfg.outputs.procmap.empty()) {
            auto os = open_out(cfg.outputs.procmap);
            write_processing_map_csv(os, processing_map(s, tr));
        }
    }
    std::cerr << to_string(cfg.policy.kind) << " V=" << cfg.policy.V << " eta=" << cfg.policy.eta
              << " slots=" << tr.slots << " cost_avg=" << tr.cost_avg << " occupancy_avg=" << tr.occupancy_avg
              << " violation_avg=" << tr.violation_avg << " delivered=" << tr.delivered << '\n';
    return 0;
}

int cmd_sweep(const CommonFlags& f, bool over_lambda) {
    const ExperimentConfig cfg = resolve(f);
    const Scenario s = cfg.scenario();
    const ArrivalModel a = cfg.arrival_model(s);
    if (cfg.policy.kind == PolicyKind::randomized)
        throw ConfigError("sweeps support the dcnc policies only");
    std::vector<double> values = f.values;
    if (values.empty())
        values = over_lambda ? cfg.lambda_values : cfg.V_values;
    if (values.empty())
        throw ConfigError("no sweep values given (--values or the config's sweep section)");
    const auto pts = over_lambda ? sweep_lambda(s, a, cfg.policy, cfg.run_options(), values, f.threads)
                                 : sweep_tradeoff(s, a, cfg.policy, cfg.run_options(), values, f.threads);
    const std::string path = f.out.empty() ? cfg.outputs.sweep : f.out;
    const char* name = over_lambda ? "lambda" : "V";
    if (path.empty()) {
        write_sweep_csv(std::cout, name, pts);
    } else {
        auto os = open_out(path);
        write_sweep_csv(os, name, pts);
    }
    std::cerr << to_string(cfg.policy.kind) << " sweep over " << name << ": " << pts.size() << " points\n";
    return 0;
}

int cmd_capacity(const CommonFlags& f) {
    const ExperimentConfig cfg = resolve(f);
    const Scenario s = cfg.scenario();
    const ArrivalModel a = cfg.arrival_model(s);
    const MarginResult m = max_margin(s.network, s.commodities, s.clients, a.rates);
    const CapacityCertificate cert = min_cost(s.network, s.commodities, s.clients, a.rates);
    const std::string path = f.out.empty() ? cfg.outputs.certificate : f.out;
    if (!path.empty()) {
        auto os = open_out(path);
        os << certificate_to_json(s.network, s.commodities, cert).dump(2) << '\n';
    }
    std::cout << "feasible=" << (cert.feasible ? "true" : "false") << " min_cost=" << cert.min_cost
              << " kappa=" << m.kappa;
    const bool uniform = std::none_of(cfg.client_rates.begin(), cfg.client_rates.end(),
                                      [](const std::optional<double>& r) { return r.has_value(); });
    if (uniform && m.feasible)
        std::cout << " boundary=" << cfg.arrivals.rate + m.kappa;
    std::cout << " status=" << cert.status << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic cloud network control simulator"};
    app.require_subcommand(1);
    CommonFlags f;
    auto* run_cmd = app.add_subcommand("run", "simulate one policy and write the trace CSV");
    auto* sv = app.add_subcommand("sweep-v", "cost/occupancy tradeoff over V");
    auto* sl = app.add_subcommand("sweep-lambda", "occupancy over the uniform client rate");
    auto* cap = app.add_subcommand("capacity", "minimum cost and stability margin from the capacity LP");
    auto* pm = app.add_subcommand("procmap", "simulate and write the average processing map CSV");
    for (auto* c : {run_cmd, sv, sl, cap, pm})
        add_common(c, f);
    for (auto* c : {sv, sl}) {
        c->add_option("--values", f.values, "sweep values")->delimiter(',');
        c->add_option("--threads", f.threads, "parallel runs (0: all cores)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*run_cmd)
            return cmd_run(f, false);
        if (*pm)
            return cmd_run(f, true);
        if (*sv)
            return cmd_sweep(f, false);
        if (*sl)
            return cmd_sweep(f, true);
        if (*cap)
            return cmd_capacity(f);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
