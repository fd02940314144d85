// engine.hpp - Time-slotted simulation loop, arrivals, metrics and sweeps.
#pragma once

#include "dcnc/capacity.hpp"
#include "dcnc/model.hpp"
#include "dcnc/policies.hpp"
#include "dcnc/queueing.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dcnc {

enum class ArrivalKind { deterministic, bernoulli_batch, poisson };

std::string to_string(ArrivalKind kind);
ArrivalKind parse_arrival_kind(const std::string& text);

/// Exogenous arrivals: i.i.d. per slot with mean rates[i][c].
struct ArrivalModel {
    Matrix rates; // N x J, zero outside source commodities
    ArrivalKind kind = ArrivalKind::deterministic;
    double batch = 0.0;       // bernoulli-batch size; 0 means twice the mean
    double quantile = 0.9999; // poisson bound used for max_arrival

    /// Largest total arrival into any node in one slot (quantile-based for poisson).
    double max_arrival() const;
    void sample(std::mt19937_64& rng, Matrix& out) const;
};

/// Everything static about one experiment.
struct Scenario {
    CloudNetwork network;
    std::vector<ServiceSpec> services;
    std::vector<Client> clients;
    CommodityIndex commodities;

    static Scenario make(CloudNetwork network, std::vector<ServiceSpec> services, std::vector<Client> clients);
};

struct RunOptions {
    long long slots = 1000;
    long long record_every = 0; // 0: record only the last slot
    bool keep_series = false;   // retain per-slot cost and occupancy
    bool validate = true;       // check every decision against the model
    std::uint64_t seed = 1;
};

struct TraceRecord {
    long long t = 0; // slots completed
    double cost = 0.0;
    double occupancy = 0.0;
    double cost_avg = 0.0;
    double occupancy_avg = 0.0;
    double violation_avg = 0.0;
    double delivered = 0.0; // cumulative
};

struct Trace {
    std::vector<TraceRecord> records;
    std::vector<double> cost_series;      // filled when keep_series
    std::vector<double> occupancy_series; // slot-start total backlog
    long long slots = 0;
    double cost_avg = 0.0;
    double occupancy_avg = 0.0;
    double violation_avg = 0.0;
    double delivered = 0.0;
    Matrix processed_total; // N x J cumulative actual processing input
    Matrix final_backlog;
};

Trace run(const Scenario& scenario, const ArrivalModel& arrivals, const PolicyConfig& policy,
          const RunOptions& options, const std::optional<CapacityCertificate>& certificate = std::nullopt);

struct SweepPoint {
    double param = 0.0;
    double cost_avg = 0.0;
    double occupancy_avg = 0.0;
    double violation_avg = 0.0;
    double delivered = 0.0;
};

/// Independent runs over V, in parallel up to `threads` (0: hardware concurrency).
std::vector<SweepPoint> sweep_tradeoff(const Scenario& scenario, const ArrivalModel& arrivals,
                                       const PolicyConfig& policy, const RunOptions& options,
                                       const std::vector<double>& V_values, unsigned threads = 0);

/// Independent runs with every client at the given uniform rate.
std::vector<SweepPoint> sweep_lambda(const Scenario& scenario, const ArrivalModel& arrivals,
                                     const PolicyConfig& policy, const RunOptions& options,
                                     const std::vector<double>& lambdas, unsigned threads = 0);

/// Average actual processing input per (node, commodity).
Matrix processing_rates(const Trace& trace);

struct ProcessingMapEntry {
    int node = 0;     // 0-based
    int service = 0;  // 0-based
    int function = 0; // 1-based position in the chain
    double rate = 0.0;
};

/// Average processing rate of every (node, function), summed over destinations.
std::vector<ProcessingMapEntry> processing_map(const Scenario& scenario, const Trace& trace);

void write_trace_csv(std::ostream& os, const Trace& trace);
void write_sweep_csv(std::ostream& os, const std::string& param_name, const std::vector<SweepPoint>& points);
void write_processing_map_csv(std::ostream& os, const std::vector<ProcessingMapEntry>& map);

} // namespace dcnc
