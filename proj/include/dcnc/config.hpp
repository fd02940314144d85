// config.hpp - Experiment configuration, JSON schema and the Abilene presets.
//
// All ids in documents are 1-based (nodes, services, functions). See README for the schema.
#pragma once

#include "dcnc/engine.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dcnc {

struct ArrivalSpec {
    ArrivalKind kind = ArrivalKind::deterministic;
    double rate = 1.0; // per client unless the client sets its own
    double batch = 0.0;
    double quantile = 0.9999;

    friend bool operator==(const ArrivalSpec&, const ArrivalSpec&) = default;
};

struct OutputPaths {
    std::string trace;
    std::string sweep;
    std::string procmap;
    std::string certificate;

    friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig {
    std::string preset; // informational once expanded
    CloudNetwork network;
    std::vector<ServiceSpec> services;
    std::vector<Client> clients;
    std::vector<std::optional<double>> client_rates; // parallel to clients
    ArrivalSpec arrivals;
    PolicyConfig policy;
    long long slots = 1000;
    long long record_every = 0;
    std::vector<double> V_values;
    std::vector<double> lambda_values;
    OutputPaths outputs;

    Scenario scenario() const;
    ArrivalModel arrival_model(const Scenario& s) const;
    RunOptions run_options() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    bool ok() const { return config.has_value(); }
};

/// Validates a document; every problem found is reported, not just the first.
ParseResult parse_config(const nlohmann::json& doc);
/// parse_config, throwing ConfigError with all errors joined.
ExperimentConfig parse_config_or_throw(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);

nlohmann::json serialize_config(const ExperimentConfig& cfg);

/// Preset names: abilene-onoff, abilene-multilevel.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

/// Abilene topology: 11 nodes, 14 bidirectional links, 2 services, all ordered client pairs.
CloudNetwork abilene_network(bool multilevel);
std::vector<ServiceSpec> abilene_services();
std::vector<Client> all_pairs_clients(int nodes, int services);

} // namespace dcnc
