#include "dcnc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace dcnc {

using nlohmann::json;

namespace {

constexpr int kAbileneNodes = 11;
// Abilene backbone links, 1-based, each used in both directions.
constexpr int kAbileneLinks[][2] = {{1, 2}, {1, 3}, {2, 3}, {2, 4}, {4, 5}, {3, 6}, {5, 6},
                                    {5, 7}, {6, 8}, {7, 8}, {8, 9}, {7, 10}, {9, 11}, {10, 11}};

// Collects every problem found while walking a document.
class Reader {
public:
    std::vector<std::string> errors;
    std::vector<std::string> warnings;

    void error(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
        if (!obj.is_object())
            return;
        for (const auto& [key, _] : obj.items()) {
            bool found = false;
            for (const char* k : known)
                found = found || key == k;
            if (!found)
                warnings.push_back(path + ": unknown field '" + key + "' ignored");
        }
    }

    const json* field(const json& obj, const std::string& path, const char* key, bool required) {
        if (obj.is_object() && obj.contains(key))
            return &obj[key];
        if (required)
            error(path, std::string("missing required field '") + key + "'");
        return nullptr;
    }

    std::optional<double> number(const json& j, const std::string& path, bool nonnegative = true) {
        if (!j.is_number()) {
            error(path, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v) || (nonnegative && v < 0.0)) {
            error(path, "expected a finite nonnegative number");
            return std::nullopt;
        }
        return v;
    }

    std::optional<long long> integer(const json& j, const std::string& path, long long lo, long long hi) {
        if (!j.is_number_integer()) {
            error(path, "expected an integer");
            return std::nullopt;
        }
        const long long v = j.get<long long>();
        if (v < lo || v > hi) {
            error(path, "value " + std::to_string(v) + " out of range [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::string> string(const json& j, const std::string& path) {
        if (!j.is_string()) {
            error(path, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<ResourceMenu> menu(const json& j, const std::string& path) {
        if (!j.is_object()) {
            error(path, "expected a resource menu object");
            return std::nullopt;
        }
        check_keys(j, path, {"levels", "unit_cost"});
        ResourceMenu m;
        bool ok = true;
        if (const json* lv = field(j, path, "levels", true)) {
            if (!lv->is_array() || lv->empty()) {
                error(path + ".levels", "expected a nonempty array of [capacity, setup_cost]");
                ok = false;
            } else {
                m.levels.clear();
                for (std::size_t k = 0; k < lv->size(); ++k) {
                    const json& pair = (*lv)[k];
                    const std::string p = path + ".levels[" + std::to_string(k) + "]";
                    if (!pair.is_array() || pair.size() != 2) {
                        error(p, "expected [capacity, setup_cost]");
                        ok = false;
                        continue;
                    }
                    auto cap = number(pair[0], p);
                    auto w = number(pair[1], p);
                    if (!cap || !w) {
                        ok = false;
                        continue;
                    }
                    m.levels.push_back({*cap, *w});
                }
            }
        } else {
            ok = false;
        }
        if (const json* e = field(j, path, "unit_cost", true)) {
            if (auto v = number(*e, path + ".unit_cost"))
                m.unit_cost = *v;
            else
                ok = false;
        } else {
            ok = false;
        }
        if (!ok)
            return std::nullopt;
        try {
            m.validate("menu");
        } catch (const ConfigError& ex) {
            error(path, ex.what());
            return std::nullopt;
        }
        return m;
    }
};

json menu_json(const ResourceMenu& m) {
    json levels = json::array();
    for (const auto& l : m.levels)
        levels.push_back(json::array({l.capacity, l.setup_cost}));
    return {{"levels", std::move(levels)}, {"unit_cost", m.unit_cost}};
}

std::optional<CloudNetwork> read_network(Reader& rd, const json& j) {
    const std::string path = "network";
    if (!j.is_object()) {
        rd.error(path, "expected an object");
        return std::nullopt;
    }
    rd.check_keys(j, path, {"nodes", "edges", "processing", "transmission"});
    const std::size_t before = rd.errors.size();
    int N = 0;
    if (const json* n = rd.field(j, path, "nodes", true))
        if (auto v = rd.integer(*n, path + ".nodes", 1, 1000000))
            N = static_cast<int>(*v);

    std::vector<Edge> edges;
    if (const json* es = rd.field(j, path, "edges", true)) {
        if (!es->is_array()) {
            rd.error(path + ".edges", "expected an array of [from, to]");
        } else {
            std::set<std::pair<int, int>> seen;
            for (std::size_t k = 0; k < es->size(); ++k) {
                const json& e = (*es)[k];
                const std::string p = path + ".edges[" + std::to_string(k) + "]";
                if (!e.is_array() || e.size() != 2) {
                    rd.error(p, "expected [from, to]");
                    continue;
                }
                auto a = rd.integer(e[0], p + "[0]", 1, std::max(N, 1));
                auto b = rd.integer(e[1], p + "[1]", 1, std::max(N, 1));
                if (!a || !b)
                    continue;
                if (*a == *b)
                    rd.error(p, "self-loop");
                else if (!seen.insert({static_cast<int>(*a), static_cast<int>(*b)}).second)
                    rd.error(p, "duplicate edge");
                else
                    edges.push_back({static_cast<int>(*a) - 1, static_cast<int>(*b) - 1});
            }
        }
    }

    auto menus = [&](const char* key, std::size_t count) {
        std::vector<ResourceMenu> out;
        const json* ms = rd.field(j, path, key, true);
        if (!ms)
            return out;
        const std::string p = path + "." + key;
        if (!ms->is_array()) {
            rd.error(p, "expected an array of resource menus");
            return out;
        }
        if (ms->size() != count) {
            rd.error(p, "expected " + std::to_string(count) + " menus, found " + std::to_string(ms->size()));
            return out;
        }
        for (std::size_t k = 0; k < ms->size(); ++k)
            if (auto m = rd.menu((*ms)[k], p + "[" + std::to_string(k) + "]"))
                out.push_back(*m);
        return out;
    };
    auto proc = menus("processing", static_cast<std::size_t>(N));
    auto tran = menus("transmission", edges.size());
    if (rd.errors.size() != before)
        return std::nullopt;
    try {
        return CloudNetwork(N, std::move(edges), std::move(proc), std::move(tran));
    } catch (const ConfigError& ex) {
        rd.error(path, ex.what());
        return std::nullopt;
    }
}

std::optional<std::vector<ServiceSpec>> read_services(Reader& rd, const json& j, int N) {
    if (!j.is_array() || j.empty()) {
        rd.error("services", "expected a nonempty array");
        return std::nullopt;
    }
    const std::size_t before = rd.errors.size();
    std::vector<ServiceSpec> out;
    for (std::size_t s = 0; s < j.size(); ++s) {
        const std::string p = "services[" + std::to_string(s) + "]";
        const json& sj = j[s];
        rd.check_keys(sj, p, {"functions"});
        ServiceSpec spec;
        const json* fs = rd.field(sj, p, "functions", true);
        if (fs && (!fs->is_array() || fs->empty()))
            rd.error(p + ".functions", "expected a nonempty array");
        else if (fs)
            for (std::size_t m = 0; m < fs->size(); ++m) {
                const json& fj = (*fs)[m];
                const std::string fp = p + ".functions[" + std::to_string(m) + "]";
                rd.check_keys(fj, fp, {"scaling", "ratio", "hosts"});
                ServiceFunction f;
                if (const json* v = rd.field(fj, fp, "scaling", true))
                    if (auto x = rd.number(*v, fp + ".scaling")) {
                        if (*x <= 0.0)
                            rd.error(fp + ".scaling", "must be positive");
                        f.scaling = *x;
                    }
                if (const json* v = rd.field(fj, fp, "ratio", false))
                    if (auto x = rd.number(*v, fp + ".ratio")) {
                        if (*x <= 0.0)
                            rd.error(fp + ".ratio", "must be positive");
                        f.processing_ratio = *x;
                    }
                if (const json* v = rd.field(fj, fp, "hosts", false)) {
                    if (!v->is_array() || v->empty())
                        rd.error(fp + ".hosts", "expected a nonempty array of node ids");
                    else
                        for (std::size_t h = 0; h < v->size(); ++h)
                            if (auto id = rd.integer((*v)[h], fp + ".hosts[" + std::to_string(h) + "]", 1, N))
                                f.hosts.push_back(static_cast<int>(*id) - 1);
                }
                spec.functions.push_back(std::move(f));
            }
        out.push_back(std::move(spec));
    }
    if (rd.errors.size() != before)
        return std::nullopt;
    return out;
}

} // namespace

Scenario ExperimentConfig::scenario() const { return Scenario::make(network, services, clients); }

ArrivalModel ExperimentConfig::arrival_model(const Scenario& s) const {
    ArrivalModel a;
    a.kind = arrivals.kind;
    a.batch = arrivals.batch;
    a.quantile = arrivals.quantile;
    a.rates = Matrix::Zero(s.network.node_count(), s.commodities.size());
    for (std::size_t k = 0; k < clients.size(); ++k) {
        const Client& cl = clients[k];
        const int c = s.commodities.find({cl.destination, cl.service, 0});
        const double rate = k < client_rates.size() && client_rates[k] ? *client_rates[k] : arrivals.rate;
        a.rates(cl.source, c) += rate;
    }
    return a;
}

RunOptions ExperimentConfig::run_options() const {
    RunOptions o;
    o.slots = slots;
    o.record_every = record_every;
    o.seed = policy.seed;
    return o;
}

ParseResult parse_config(const json& doc) {
    Reader rd;
    ParseResult res;
    if (!doc.is_object()) {
        res.errors.push_back("document: expected a JSON object");
        return res;
    }
    rd.check_keys(doc, "document",
                  {"preset", "network", "services", "clients", "arrivals", "policy", "run", "sweep", "outputs"});
    ExperimentConfig cfg;

    std::optional<ExperimentConfig> base;
    if (const json* p = rd.field(doc, "document", "preset", false))
        if (auto name = rd.string(*p, "preset")) {
            try {
                base = preset_config(*name);
            } catch (const ConfigError& ex) {
                rd.error("preset", ex.what());
            }
        }
    const bool have_base = base.has_value();
    if (have_base)
        cfg = *base;

    std::optional<CloudNetwork> network;
    if (const json* n = rd.field(doc, "document", "network", !have_base))
        network = read_network(rd, *n);
    else if (have_base)
        network = cfg.network;
    const int N = network ? network->node_count() : 0;

    std::optional<std::vector<ServiceSpec>> services;
    if (const json* s = rd.field(doc, "document", "services", !have_base))
        services = network ? read_services(rd, *s, N) : std::nullopt;
    else if (have_base)
        services = cfg.services;

    if (const json* cs = rd.field(doc, "document", "clients", !have_base)) {
        cfg.clients.clear();
        cfg.client_rates.clear();
        if (!cs->is_array()) {
            rd.error("clients", "expected an array");
        } else if (network && services) {
            const int S = static_cast<int>(services->size());
            for (std::size_t k = 0; k < cs->size(); ++k) {
                const json& cj = (*cs)[k];
                const std::string p = "clients[" + std::to_string(k) + "]";
                rd.check_keys(cj, p, {"source", "destination", "service", "rate"});
                Client cl;
                bool ok = true;
                auto id = [&](const char* key, int hi, int& out) {
                    if (const json* v = rd.field(cj, p, key, true)) {
                        if (auto x = rd.integer(*v, p + "." + key, 1, hi))
                            out = static_cast<int>(*x) - 1;
                        else
                            ok = false;
                    } else {
                        ok = false;
                    }
                };
                id("source", N, cl.source);
                id("destination", N, cl.destination);
                id("service", S, cl.service);
                std::optional<double> rate;
                if (const json* v = rd.field(cj, p, "rate", false)) {
                    rate = rd.number(*v, p + ".rate");
                    ok = ok && rate.has_value();
                }
                if (ok) {
                    cfg.clients.push_back(cl);
                    cfg.client_rates.push_back(rate);
                }
            }
        }
    }

    if (const json* a = rd.field(doc, "document", "arrivals", false)) {
        rd.check_keys(*a, "arrivals", {"kind", "rate", "batch", "quantile"});
        if (const json* v = rd.field(*a, "arrivals", "kind", false))
            if (auto s = rd.string(*v, "arrivals.kind")) {
                try {
                    cfg.arrivals.kind = parse_arrival_kind(*s);
                } catch (const ConfigError& ex) {
                    rd.error("arrivals.kind", ex.what());
                }
            }
        if (const json* v = rd.field(*a, "arrivals", "rate", false))
            if (auto x = rd.number(*v, "arrivals.rate"))
                cfg.arrivals.rate = *x;
        if (const json* v = rd.field(*a, "arrivals", "batch", false))
            if (auto x = rd.number(*v, "arrivals.batch"))
                cfg.arrivals.batch = *x;
        if (const json* v = rd.field(*a, "arrivals", "quantile", false))
            if (auto x = rd.number(*v, "arrivals.quantile")) {
                if (*x <= 0.0 || *x >= 1.0)
                    rd.error("arrivals.quantile", "must lie in (0, 1)");
                cfg.arrivals.quantile = *x;
            }
    }

    if (const json* p = rd.field(doc, "document", "policy", false)) {
        rd.check_keys(*p, "policy", {"kind", "V", "eta", "seed"});
        if (const json* v = rd.field(*p, "policy", "kind", false))
            if (auto s = rd.string(*v, "policy.kind")) {
                try {
                    cfg.policy.kind = parse_policy_kind(*s);
                } catch (const ConfigError& ex) {
                    rd.error("policy.kind", ex.what());
                }
            }
        if (const json* v = rd.field(*p, "policy", "V", false))
            if (auto x = rd.number(*v, "policy.V"))
                cfg.policy.V = *x;
        if (const json* v = rd.field(*p, "policy", "eta", false))
            if (auto x = rd.number(*v, "policy.eta"))
                cfg.policy.eta = *x;
        if (const json* v = rd.field(*p, "policy", "seed", false)) {
            if (v->is_number_unsigned() || (v->is_number_integer() && v->get<long long>() >= 0))
                cfg.policy.seed = v->get<std::uint64_t>();
            else
                rd.error("policy.seed", "expected a nonnegative integer");
        }
    }

    if (const json* r = rd.field(doc, "document", "run", false)) {
        rd.check_keys(*r, "run", {"slots", "record_every"});
        if (const json* v = rd.field(*r, "run", "slots", false))
            if (auto x = rd.integer(*v, "run.slots", 1, std::numeric_limits<long long>::max()))
                cfg.slots = *x;
        if (const json* v = rd.field(*r, "run", "record_every", false))
            if (auto x = rd.integer(*v, "run.record_every", 0, std::numeric_limits<long long>::max()))
                cfg.record_every = *x;
    }

    auto number_list = [&](const json& j, const std::string& path) {
        std::vector<double> out;
        if (!j.is_array()) {
            rd.error(path, "expected an array of numbers");
            return out;
        }
        for (std::size_t k = 0; k < j.size(); ++k)
            if (auto x = rd.number(j[k], path + "[" + std::to_string(k) + "]"))
                out.push_back(*x);
        return out;
    };
    if (const json* s = rd.field(doc, "document", "sweep", false)) {
        rd.check_keys(*s, "sweep", {"V", "lambda"});
        if (const json* v = rd.field(*s, "sweep", "V", false))
            cfg.V_values = number_list(*v, "sweep.V");
        if (const json* v = rd.field(*s, "sweep", "lambda", false))
            cfg.lambda_values = number_list(*v, "sweep.lambda");
    }

    if (const json* o = rd.field(doc, "document", "outputs", false)) {
        rd.check_keys(*o, "outputs", {"trace", "sweep", "procmap", "certificate"});
        auto path_field = [&](const char* key, std::string& out) {
            if (const json* v = rd.field(*o, "outputs", key, false))
                if (auto s = rd.string(*v, std::string("outputs.") + key))
                    out = *s;
        };
        path_field("trace", cfg.outputs.trace);
        path_field("sweep", cfg.outputs.sweep);
        path_field("procmap", cfg.outputs.procmap);
        path_field("certificate", cfg.outputs.certificate);
    }

    if (network && services) {
        cfg.network = *network;
        cfg.services = *services;
        try {
            validate_services(cfg.network, cfg.services);
        } catch (const ConfigError& ex) {
            rd.error("services", ex.what());
        }
        std::set<std::tuple<int, int, int>> seen;
        for (const Client& cl : cfg.clients)
            if (!seen.insert({cl.source, cl.destination, cl.service}).second)
                rd.error("clients", "duplicate client (" + std::to_string(cl.source + 1) + ", " +
                                        std::to_string(cl.destination + 1) + ", " + std::to_string(cl.service + 1) +
                                        ")");
    }

    res.warnings = std::move(rd.warnings);
    res.errors = std::move(rd.errors);
    if (res.errors.empty())
        res.config = std::move(cfg);
    return res;
}

ExperimentConfig parse_config_or_throw(const json& doc) {
    ParseResult r = parse_config(doc);
    if (!r.ok()) {
        std::ostringstream os;
        os << "invalid configuration:";
        for (const auto& e : r.errors)
            os << "\n  " << e;
        throw ConfigError(os.str());
    }
    return std::move(*r.config);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& ex) {
        throw ConfigError(path + ": " + ex.what());
    }
    return parse_config_or_throw(doc);
}

json serialize_config(const ExperimentConfig& cfg) {
    json doc;
    if (!cfg.preset.empty())
        doc["preset"] = cfg.preset;
    json edges = json::array(), proc = json::array(), tran = json::array();
    for (const Edge& e : cfg.network.edges())
        edges.push_back(json::array({e.from + 1, e.to + 1}));
    for (const auto& m : cfg.network.processing_menus())
        proc.push_back(menu_json(m));
    for (const auto& m : cfg.network.transmission_menus())
        tran.push_back(menu_json(m));
    doc["network"] = {{"nodes", cfg.network.node_count()},
                      {"edges", std::move(edges)},
                      {"processing", std::move(proc)},
                      {"transmission", std::move(tran)}};
    json services = json::array();
    for (const ServiceSpec& s : cfg.services) {
        json fs = json::array();
        for (const ServiceFunction& f : s.functions) {
            json fj = {{"scaling", f.scaling}, {"ratio", f.processing_ratio}};
            if (!f.hosts.empty()) {
                json hosts = json::array();
                for (int h : f.hosts)
                    hosts.push_back(h + 1);
                fj["hosts"] = std::move(hosts);
            }
            fs.push_back(std::move(fj));
        }
        services.push_back({{"functions", std::move(fs)}});
    }
    doc["services"] = std::move(services);
    json clients = json::array();
    for (std::size_t k = 0; k < cfg.clients.size(); ++k) {
        const Client& cl = cfg.clients[k];
        json cj = {{"source", cl.source + 1}, {"destination", cl.destination + 1}, {"service", cl.service + 1}};
        if (k < cfg.client_rates.size() && cfg.client_rates[k])
            cj["rate"] = *cfg.client_rates[k];
        clients.push_back(std::move(cj));
    }
    doc["clients"] = std::move(clients);
    doc["arrivals"] = {{"kind", to_string(cfg.arrivals.kind)},
                       {"rate", cfg.arrivals.rate},
                       {"batch", cfg.arrivals.batch},
                       {"quantile", cfg.arrivals.quantile}};
    doc["policy"] = {{"kind", to_string(cfg.policy.kind)},
                     {"V", cfg.policy.V},
                     {"eta", cfg.policy.eta},
                     {"seed", cfg.policy.seed}};
    doc["run"] = {{"slots", cfg.slots}, {"record_every", cfg.record_every}};
    doc["sweep"] = {{"V", cfg.V_values}, {"lambda", cfg.lambda_values}};
    json outputs = json::object();
    if (!cfg.outputs.trace.empty())
        outputs["trace"] = cfg.outputs.trace;
    if (!cfg.outputs.sweep.empty())
        outputs["sweep"] = cfg.outputs.sweep;
    if (!cfg.outputs.procmap.empty())
        outputs["procmap"] = cfg.outputs.procmap;
    if (!cfg.outputs.certificate.empty())
        outputs["certificate"] = cfg.outputs.certificate;
    doc["outputs"] = std::move(outputs);
    return doc;
}

CloudNetwork abilene_network(bool multilevel) {
    std::vector<Edge> edges;
    for (const auto& l : kAbileneLinks) {
        edges.push_back({l[0] - 1, l[1] - 1});
        edges.push_back({l[1] - 1, l[0] - 1});
    }
    std::vector<ResourceMenu> proc, tran;
    for (int i = 1; i <= kAbileneNodes; ++i) {
        const double setup = (i == 5 || i == 6) ? 110.0 : 440.0;
        proc.push_back(multilevel ? ResourceMenu::uniform_steps(10, 440.0, setup, 1.0)
                                  : ResourceMenu::on_off(440.0, setup, 1.0));
    }
    for (std::size_t e = 0; e < edges.size(); ++e)
        tran.push_back(multilevel ? ResourceMenu::uniform_steps(10, 440.0, 440.0, 1.0)
                                  : ResourceMenu::on_off(440.0, 440.0, 1.0));
    return CloudNetwork(kAbileneNodes, std::move(edges), std::move(proc), std::move(tran));
}

std::vector<ServiceSpec> abilene_services() {
    ServiceSpec expand{{ServiceFunction{1.0, 1.0, {}}, ServiceFunction{3.0, 1.0, {}}}};
    ServiceSpec compress{{ServiceFunction{0.25, 1.0, {}}, ServiceFunction{1.0, 1.0, {}}}};
    return {expand, compress};
}

std::vector<Client> all_pairs_clients(int nodes, int services) {
    std::vector<Client> out;
    for (int s = 0; s < services; ++s)
        for (int a = 0; a < nodes; ++a)
            for (int b = 0; b < nodes; ++b)
                if (a != b)
                    out.push_back({a, b, s});
    return out;
}

std::vector<std::string> preset_names() { return {"abilene-onoff", "abilene-multilevel"}; }

ExperimentConfig preset_config(const std::string& name) {
    if (name != "abilene-onoff" && name != "abilene-multilevel")
        throw ConfigError("unknown preset '" + name + "'");
    ExperimentConfig cfg;
    cfg.preset = name;
    cfg.network = abilene_network(name == "abilene-multilevel");
    cfg.services = abilene_services();
    cfg.clients = all_pairs_clients(kAbileneNodes, static_cast<int>(cfg.services.size()));
    cfg.client_rates.assign(cfg.clients.size(), std::nullopt);
    cfg.arrivals.rate = 1.0;
    cfg.policy = {PolicyKind::dcnc_l, 1000.0, 0.0, 1};
    cfg.slots = 1000000;
    cfg.record_every = 10000;
    return cfg;
}

} // namespace dcnc
