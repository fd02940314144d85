#include "dcnc/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <iomanip>
#include <ostream>
#include <thread>

namespace dcnc {

std::string to_string(ArrivalKind kind) {
    switch (kind) {
    case ArrivalKind::deterministic: return "deterministic";
    case ArrivalKind::bernoulli_batch: return "bernoulli-batch";
    case ArrivalKind::poisson: return "poisson";
    }
    return "unknown";
}

ArrivalKind parse_arrival_kind(const std::string& text) {
    std::string s;
    for (char ch : text)
        s.push_back(ch == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    for (ArrivalKind k : {ArrivalKind::deterministic, ArrivalKind::bernoulli_batch, ArrivalKind::poisson})
        if (s == to_string(k))
            return k;
    throw ConfigError("unknown arrival kind '" + text + "'");
}

namespace {

double poisson_quantile(double mean, double q) {
    if (mean <= 0.0)
        return 0.0;
    double pmf = std::exp(-mean), cdf = pmf;
    int n = 0;
    while (cdf < q && n < 100000) {
        ++n;
        pmf *= mean / n;
        cdf += pmf;
    }
    return n;
}

} // namespace

double ArrivalModel::max_arrival() const {
    double worst = 0.0;
    for (Index i = 0; i < rates.rows(); ++i) {
        double node = 0.0;
        for (Index c = 0; c < rates.cols(); ++c) {
            const double lam = rates(i, c);
            if (lam <= 0.0)
                continue;
            switch (kind) {
            case ArrivalKind::deterministic: node += lam; break;
            case ArrivalKind::bernoulli_batch: node += batch > 0.0 ? batch : 2.0 * lam; break;
            case ArrivalKind::poisson: node += poisson_quantile(lam, quantile); break;
            }
        }
        worst = std::max(worst, node);
    }
    return worst;
}

void ArrivalModel::sample(std::mt19937_64& rng, Matrix& out) const {
    if (kind == ArrivalKind::deterministic) {
        out = rates;
        return;
    }
    out.setZero(rates.rows(), rates.cols());
    for (Index i = 0; i < rates.rows(); ++i)
        for (Index c = 0; c < rates.cols(); ++c) {
            const double lam = rates(i, c);
            if (lam <= 0.0)
                continue;
            if (kind == ArrivalKind::poisson) {
                out(i, c) = static_cast<double>(std::poisson_distribution<long long>(lam)(rng));
            } else {
                const double b = batch > 0.0 ? batch : 2.0 * lam;
                if (lam > b)
                    throw ConfigError("bernoulli batch smaller than its mean rate");
                out(i, c) = std::generate_canonical<double, 53>(rng) < lam / b ? b : 0.0;
            }
        }
}

Scenario Scenario::make(CloudNetwork network, std::vector<ServiceSpec> services, std::vector<Client> clients) {
    Scenario s{std::move(network), std::move(services), std::move(clients), {}};
    s.commodities = build_commodities(s.network, s.services, s.clients);
    return s;
}

Trace run(const Scenario& scenario, const ArrivalModel& arrivals, const PolicyConfig& policy,
          const RunOptions& options, const std::optional<CapacityCertificate>& certificate) {
    if (options.slots < 1)
        throw ConfigError("the horizon must be at least one slot");
    if (options.record_every < 0)
        throw ConfigError("record_every must be nonnegative");
    const CloudNetwork& net = scenario.network;
    const CommodityIndex& com = scenario.commodities;
    const int N = net.node_count();
    const int J = com.size();
    validate_rates(net, com, arrivals.rates);

    PolicyConfig cfg = policy;
    std::seed_seq policy_seed{options.seed, std::uint64_t{0x9e3779b97f4a7c15ULL}};
    std::mt19937_64 seeder(policy_seed);
    cfg.seed = seeder();
    Controller controller(net, scenario.services, com, cfg, certificate);
    std::mt19937_64 rng(options.seed);

    QueueState state = QueueState::zeros(N, J);
    Decision decision = Decision::idle(N, net.edge_count(), J);
    FlowAccounting acct;
    Matrix a = Matrix::Zero(N, J);
    Matrix cumulative_change = Matrix::Zero(N, J);

    Trace tr;
    tr.processed_total = Matrix::Zero(N, J);
    if (options.keep_series) {
        tr.cost_series.reserve(static_cast<std::size_t>(options.slots));
        tr.occupancy_series.reserve(static_cast<std::size_t>(options.slots));
    }
    double cost_sum = 0.0, occ_sum = 0.0;
    for (long long t = 0; t < options.slots; ++t) {
        const double occupancy = state.backlog.sum();
        controller.decide(state.backlog, decision);
        arrivals.sample(rng, a);
        step(net, com, state, decision, a, acct, options.validate);

        cost_sum += acct.cost;
        occ_sum += occupancy;
        tr.delivered += acct.delivered;
        cumulative_change += acct.net_change;
        tr.processed_total += acct.processed;
        if (options.keep_series) {
            tr.cost_series.push_back(acct.cost);
            tr.occupancy_series.push_back(occupancy);
        }
        const long long done = t + 1;
        const bool last = done == options.slots;
        if (last || (options.record_every > 0 && done % options.record_every == 0)) {
            TraceRecord r;
            r.t = done;
            r.cost = acct.cost;
            r.occupancy = occupancy;
            r.cost_avg = cost_sum / static_cast<double>(done);
            r.occupancy_avg = occ_sum / static_cast<double>(done);
            r.violation_avg = cumulative_change.cwiseAbs().sum() / static_cast<double>(done);
            r.delivered = tr.delivered;
            tr.records.push_back(r);
        }
    }
    tr.slots = options.slots;
    tr.cost_avg = tr.records.back().cost_avg;
    tr.occupancy_avg = tr.records.back().occupancy_avg;
    tr.violation_avg = tr.records.back().violation_avg;
    tr.final_backlog = state.backlog;
    return tr;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (std::size_t k = next++; k < count; k = next++) {
            try {
                fn(k);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

SweepPoint summarize(double param, const Trace& t) {
    return {param, t.cost_avg, t.occupancy_avg, t.violation_avg, t.delivered};
}

} // namespace

std::vector<SweepPoint> sweep_tradeoff(const Scenario& scenario, const ArrivalModel& arrivals,
                                       const PolicyConfig& policy, const RunOptions& options,
                                       const std::vector<double>& V_values, unsigned threads) {
    if (V_values.empty())
        throw ConfigError("sweep needs at least one V value");
    std::vector<SweepPoint> out(V_values.size());
    parallel_for(V_values.size(), threads, [&](std::size_t k) {
        PolicyConfig p = policy;
        p.V = V_values[k];
        out[k] = summarize(V_values[k], run(scenario, arrivals, p, options));
    });
    return out;
}

std::vector<SweepPoint> sweep_lambda(const Scenario& scenario, const ArrivalModel& arrivals,
                                     const PolicyConfig& policy, const RunOptions& options,
                                     const std::vector<double>& lambdas, unsigned threads) {
    if (lambdas.empty())
        throw ConfigError("sweep needs at least one rate");
    std::vector<SweepPoint> out(lambdas.size());
    parallel_for(lambdas.size(), threads, [&](std::size_t k) {
        ArrivalModel a = arrivals;
        a.rates = client_rates(scenario.network, scenario.commodities, scenario.clients, lambdas[k]);
        out[k] = summarize(lambdas[k], run(scenario, a, policy, options));
    });
    return out;
}

Matrix processing_rates(const Trace& trace) {
    return trace.processed_total / static_cast<double>(std::max<long long>(1, trace.slots));
}

std::vector<ProcessingMapEntry> processing_map(const Scenario& scenario, const Trace& trace) {
    const Matrix rates = processing_rates(trace);
    std::vector<ProcessingMapEntry> out;
    for (int i = 0; i < scenario.network.node_count(); ++i)
        for (int s = 0; s < static_cast<int>(scenario.services.size()); ++s)
            for (int m = 1; m <= scenario.services[static_cast<std::size_t>(s)].function_count(); ++m) {
                double r = 0.0;
                bool used = false;
                for (int c = 0; c < scenario.commodities.size(); ++c) {
                    const CommodityId& id = scenario.commodities.id(c);
                    if (id.service == s && id.stage == m - 1) {
                        r += rates(i, c);
                        used = true;
                    }
                }
                if (used)
                    out.push_back({i, s, m, r});
            }
    return out;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
    os << "t,cost_avg,occupancy_avg,violation_avg,delivered\n" << std::setprecision(12);
    for (const TraceRecord& r : trace.records)
        os << r.t << ',' << r.cost_avg << ',' << r.occupancy_avg << ',' << r.violation_avg << ',' << r.delivered
           << '\n';
}

void write_sweep_csv(std::ostream& os, const std::string& param_name, const std::vector<SweepPoint>& points) {
    os << param_name << ",cost_avg,occupancy_avg,violation_avg,delivered\n" << std::setprecision(12);
    for (const SweepPoint& p : points)
        os << p.param << ',' << p.cost_avg << ',' << p.occupancy_avg << ',' << p.violation_avg << ',' << p.delivered
           << '\n';
}

void write_processing_map_csv(std::ostream& os, const std::vector<ProcessingMapEntry>& map) {
    os << "node,service,function,rate\n" << std::setprecision(12);
    for (const ProcessingMapEntry& e : map)
        os << e.node + 1 << ',' << e.service + 1 << ',' << e.function << ',' << e.rate << '\n';
}

} // namespace dcnc
