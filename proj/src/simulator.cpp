#include "kgroot/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "kgroot/error.hpp"
#include "kgroot/serialize.hpp"

namespace kgroot {

std::string to_string(Locality l) {
    switch (l) {
        case Locality::SameEntity: return "same_entity";
        case Locality::Upstream: return "upstream";
        case Locality::Downstream: return "downstream";
    }
    return "same_entity";
}

void FaultTemplate::validate() const {
    if (class_id.empty() || root_event_type.empty()) throw InvalidParams("fault template needs a class and root type");
    if (noise_rate < 0.0) throw InvalidParams("noise_rate must be non-negative");
    for (const auto& r : rules) {
        if (!(r.probability > 0.0 && r.probability <= 1.0)) throw InvalidParams("rule probability must lie in (0, 1]");
        if (r.min_delay_ms < 1 || r.max_delay_ms < r.min_delay_ms) throw InvalidParams("rule delays must satisfy 1 <= min <= max");
    }
}

const std::vector<EventType>& root_event_types() {
    static const std::vector<EventType> kTypes{
        {"CONFIG_ERROR", "invalid configuration pushed to a service"},
        {"NETWORK_DELAY", "injected network latency on a pod"},
        {"POD_KILLED", "pod terminated"},
        {"CPU_OVERLOAD", "cpu saturation on a pod"},
        {"MEMORY_OVERLOAD", "memory pressure on a pod"},
    };
    return kTypes;
}

const std::vector<EventType>& symptom_event_types() {
    static const std::vector<EventType> kTypes{
        {"LATENCY_SPIKE", "p99 latency above baseline"},
        {"HTTP_5XX", "server error rate up"},
        {"HTTP_4XX", "client error rate up"},
        {"REQUEST_TIMEOUT", "upstream requests timing out"},
        {"CONN_REFUSED", "connections refused"},
        {"CONN_POOL_EXHAUSTED", "connection pool exhausted"},
        {"RETRY_STORM", "retry volume surge"},
        {"QUEUE_BACKLOG", "message queue backlog"},
        {"GC_PAUSE", "long garbage collection pauses"},
        {"OOM_KILLED", "container killed for memory"},
        {"POD_RESTART", "pod restarted"},
        {"CRASH_LOOP", "container crash loop"},
        {"READINESS_FAIL", "readiness probe failing"},
        {"LIVENESS_FAIL", "liveness probe failing"},
        {"DISK_IO_HIGH", "disk io saturation"},
        {"PACKET_LOSS", "packet loss on pod network"},
        {"PACKET_CORRUPT", "corrupted packets on pod network"},
        {"DNS_FAILURE", "name resolution failures"},
        {"THREAD_EXHAUSTED", "worker thread pool exhausted"},
        {"DB_SLOW_QUERY", "slow database queries"},
        {"CACHE_MISS_SURGE", "cache miss ratio surge"},
        {"CIRCUIT_OPEN", "circuit breaker open"},
        {"ERROR_LOG_SURGE", "error log volume surge"},
        {"THROUGHPUT_DROP", "request throughput drop"},
        {"SLA_BREACH", "service level objective breached"},
        {"CPU_THROTTLED", "cpu throttling by cgroup"},
        {"SWAP_HIGH", "swap usage high"},
        {"REPLICA_UNAVAILABLE", "replicas unavailable"},
        {"EXCEPTION_SURGE", "exception count surge"},
        {"AUTH_FAILURE", "authentication failures"},
    };
    return kTypes;
}

const std::vector<EventType>& noise_event_types() {
    static const std::vector<EventType> kTypes{
        {"DEPLOY_ROLLOUT", "routine deployment"},
        {"AUTOSCALE_UP", "horizontal scale out"},
        {"AUTOSCALE_DOWN", "horizontal scale in"},
        {"CONFIG_RELOAD", "routine configuration reload"},
        {"CRON_JOB", "scheduled job run"},
        {"LOG_ROTATE", "log rotation"},
        {"BACKUP_START", "backup started"},
        {"CERT_RENEW", "certificate renewed"},
        {"HEALTHCHECK_FLAP", "single health check flap"},
        {"NODE_DRAIN", "node drained for maintenance"},
    };
    return kTypes;
}

namespace {

std::string signature_of(const std::string& type) {
    std::string s = type;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

RecordSource source_of(const std::string& type) {
    static const std::set<std::string> kActivity{"CONFIG_ERROR", "POD_KILLED", "DEPLOY_ROLLOUT", "AUTOSCALE_UP",
                                                 "AUTOSCALE_DOWN", "CONFIG_RELOAD", "CRON_JOB", "BACKUP_START",
                                                 "CERT_RENEW", "NODE_DRAIN", "POD_RESTART"};
    static const std::set<std::string> kLog{"HTTP_5XX", "HTTP_4XX", "CONN_REFUSED", "DNS_FAILURE", "ERROR_LOG_SURGE",
                                            "EXCEPTION_SURGE", "AUTH_FAILURE", "CRASH_LOOP", "OOM_KILLED", "LOG_ROTATE"};
    if (kActivity.contains(type)) return RecordSource::Activity;
    if (kLog.contains(type)) return RecordSource::Log;
    return RecordSource::Metric;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

std::string format_value(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

}  // namespace

TemplateCatalog simulator_template_catalog() {
    std::vector<TemplateRule> rules;
    auto add = [&](const EventType& t) {
        TemplateRule r;
        r.source = source_of(t.id);
        r.pattern = "(^|\\s)alert=" + signature_of(t.id) + "(\\s|$)";
        r.event_type = t.id;
        r.extract_keys = {"value"};
        rules.push_back(std::move(r));
    };
    for (const auto& t : root_event_types()) add(t);
    for (const auto& t : symptom_event_types()) add(t);
    for (const auto& t : noise_event_types()) add(t);
    return TemplateCatalog(std::move(rules));
}

Topology generate_topology(std::size_t n_services, double edge_density, std::uint64_t seed) {
    if (n_services < 2) throw InvalidParams("topology needs at least two services");
    if (!(edge_density >= 0.0 && edge_density <= 1.0)) throw InvalidParams("edge_density must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::vector<std::string> services;
    for (std::size_t i = 0; i < n_services; ++i) {
        std::ostringstream name;
        name << "svc-" << std::setw(2) << std::setfill('0') << i;
        services.push_back(name.str());
    }
    std::set<std::pair<std::size_t, std::size_t>> edges;  // (caller, callee), caller index < callee index
    for (std::size_t i = 1; i < n_services; ++i) edges.insert({pick(rng, i), i});
    for (std::size_t i = 0; i < n_services; ++i) {
        for (std::size_t j = i + 1; j < n_services; ++j) {
            if (!edges.contains({i, j}) && uniform01(rng) < edge_density) edges.insert({i, j});
        }
    }
    std::vector<std::pair<std::string, std::string>> named;
    for (const auto& [a, b] : edges) named.emplace_back(services[a], services[b]);
    return Topology(std::move(services), std::move(named));
}

std::vector<FaultTemplate> default_templates(std::size_t n_classes, std::uint64_t seed, double noise_rate) {
    if (n_classes == 0) throw InvalidParams("need at least one fault class");
    std::mt19937_64 rng(seed);
    const auto& roots = root_event_types();
    const auto& symptoms = symptom_event_types();
    std::vector<FaultTemplate> out;
    for (std::size_t c = 0; c < n_classes; ++c) {
        FaultTemplate t;
        std::ostringstream id;
        id << "F" << std::setw(2) << std::setfill('0') << c << "_" << roots[c % roots.size()].id;
        t.class_id = id.str();
        t.root_event_type = roots[c % roots.size()].id;
        t.noise_rate = noise_rate;

        std::vector<std::size_t> pool(symptoms.size());
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
        std::shuffle(pool.begin(), pool.end(), rng);
        const std::size_t n_symptoms = 4 + pick(rng, 3);
        std::vector<std::string> tree{t.root_event_type};
        for (std::size_t s = 0; s < n_symptoms; ++s) {
            PropagationRule r;
            // bias towards chains: half of the time extend the newest node
            r.trigger_type = uniform01(rng) < 0.5 ? tree.back() : tree[pick(rng, tree.size())];
            r.produced_type = symptoms[pool[s]].id;
            r.min_delay_ms = 1000 + static_cast<std::int64_t>(pick(rng, 4000));
            r.max_delay_ms = r.min_delay_ms + 2000 + static_cast<std::int64_t>(pick(rng, 8000));
            r.probability = s == 0 ? 1.0 : 0.8 + 0.2 * uniform01(rng);
            const std::size_t loc = pick(rng, 4);
            r.locality = loc == 0 ? Locality::SameEntity : (loc == 3 ? Locality::Downstream : Locality::Upstream);
            tree.push_back(r.produced_type);
            t.rules.push_back(std::move(r));
        }
        out.push_back(std::move(t));
    }
    return out;
}

namespace {

struct Draft {
    Event event;
    std::string parent;  // empty for root and noise
    bool noise = false;
};

GeneratedCase simulate_case(const Topology& topo, const FaultTemplate& tpl, const std::string& failure_id,
                            std::int64_t base_ms, std::mt19937_64& rng) {
    const auto& services = topo.services();
    std::vector<Draft> drafts;
    auto next_id = [&]() {
        std::ostringstream id;
        id << failure_id << "-e" << std::setw(3) << std::setfill('0') << drafts.size();
        return id.str();
    };

    Draft root;
    root.event.event_id = next_id();
    root.event.event_type = tpl.root_event_type;
    root.event.entity = services[pick(rng, services.size())];
    root.event.timestamp_ms = base_ms;
    drafts.push_back(root);

    std::deque<std::size_t> frontier{0};
    while (!frontier.empty()) {
        const std::size_t cur = frontier.front();
        frontier.pop_front();
        const Event trigger = drafts[cur].event;
        for (const auto& rule : tpl.rules) {
            if (rule.trigger_type != trigger.event_type) continue;
            if (uniform01(rng) >= rule.probability) continue;
            std::vector<std::string> targets;
            if (rule.locality == Locality::Upstream) targets = topo.callers(trigger.entity);
            if (rule.locality == Locality::Downstream) targets = topo.callees(trigger.entity);
            Draft d;
            d.event.event_id = next_id();
            d.event.event_type = rule.produced_type;
            d.event.entity = targets.empty() ? trigger.entity : targets[pick(rng, targets.size())];
            d.event.timestamp_ms = trigger.timestamp_ms + uniform_int(rng, rule.min_delay_ms, rule.max_delay_ms);
            d.parent = trigger.event_id;
            drafts.push_back(std::move(d));
            frontier.push_back(drafts.size() - 1);
        }
    }

    // Alarm: the last propagated event (event order).
    std::size_t alarm = 0;
    for (std::size_t i = 1; i < drafts.size(); ++i) {
        if (event_before(drafts[alarm].event, drafts[i].event)) alarm = i;
    }

    const std::int64_t start = base_ms - 60'000;
    const std::int64_t end = drafts[alarm].event.timestamp_ms + 30'000;
    const double minutes = static_cast<double>(end - start) / 60'000.0;
    const auto n_noise = static_cast<std::size_t>(std::floor(tpl.noise_rate * minutes + uniform01(rng)));
    const auto& noise = noise_event_types();
    for (std::size_t i = 0; i < n_noise; ++i) {
        Draft d;
        d.noise = true;
        d.event.event_id = next_id();
        d.event.event_type = noise[pick(rng, noise.size())].id;
        d.event.entity = services[pick(rng, services.size())];
        d.event.timestamp_ms = uniform_int(rng, start, end);
        drafts.push_back(std::move(d));
    }

    GeneratedCase gc;
    gc.sequence.failure_id = failure_id;
    gc.sequence.fault_class = tpl.class_id;
    gc.sequence.alarm_event_id = drafts[alarm].event.event_id;
    gc.truth.failure_id = failure_id;
    gc.truth.fault_class = tpl.class_id;
    gc.truth.root_event_id = drafts[0].event.event_id;
    gc.truth.alarm_event_id = drafts[alarm].event.event_id;

    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < drafts.size(); ++i) by_id[drafts[i].event.event_id] = i;
    std::vector<std::size_t> path;
    for (std::size_t cur = alarm;;) {
        path.push_back(cur);
        if (drafts[cur].parent.empty()) break;
        cur = by_id.at(drafts[cur].parent);
    }
    std::reverse(path.begin(), path.end());
    for (auto i : path) {
        gc.truth.propagation_path.push_back(drafts[i].event.event_type);
        gc.truth.path_event_ids.push_back(drafts[i].event.event_id);
    }
    for (const auto& d : drafts) {
        if (d.noise) continue;
        gc.truth.fault_event_ids.push_back(d.event.event_id);
        if (!d.parent.empty()) gc.truth.causal_links.emplace_back(d.parent, d.event.event_id);
    }

    std::sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) { return event_before(a.event, b.event); });
    for (auto& d : drafts) {
        RawRecord raw;
        raw.source = source_of(d.event.event_type);
        raw.entity = d.event.entity;
        raw.timestamp_ms = d.event.timestamp_ms;
        const std::string value = format_value(0.5 + 0.5 * uniform01(rng));
        raw.payload = "alert=" + signature_of(d.event.event_type) + " value=" + value;
        d.event.attributes["value"] = value;
        gc.raw_records.push_back(std::move(raw));
        gc.sequence.events.push_back(std::move(d.event));
    }
    return gc;
}

}  // namespace

std::vector<GeneratedCase> generate_dataset(const Topology& topo,
                                            const std::vector<FaultTemplate>& templates,
                                            std::size_t n_failures,
                                            std::uint64_t seed) {
    if (templates.empty()) throw InvalidParams("generate_dataset: no fault templates");
    if (topo.services().empty()) throw InvalidParams("generate_dataset: empty topology");
    if (n_failures < 4 * templates.size()) {
        throw InvalidParams("generate_dataset: need at least four failures per fault class");
    }
    for (const auto& t : templates) t.validate();

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> assignment;
    for (std::size_t i = 0; i < n_failures; ++i) assignment.push_back(i % templates.size());
    std::shuffle(assignment.begin(), assignment.end(), rng);

    std::vector<GeneratedCase> out;
    const std::int64_t epoch_ms = 1'700'000'000'000;
    for (std::size_t i = 0; i < n_failures; ++i) {
        std::ostringstream id;
        id << "case-" << std::setw(4) << std::setfill('0') << i;
        const std::int64_t base = epoch_ms + static_cast<std::int64_t>(i) * 3'600'000 + uniform_int(rng, 0, 600'000);
        out.push_back(simulate_case(topo, templates[assignment[i]], id.str(), base, rng));
    }
    return out;
}

std::vector<EventSequence> Dataset::sequences() const {
    std::vector<EventSequence> out;
    for (const auto& c : cases) out.push_back(c.sequence);
    return out;
}

std::map<std::string, CaseTruth> Dataset::truths() const {
    std::map<std::string, CaseTruth> out;
    for (const auto& c : cases) out[c.truth.failure_id] = c.truth;
    return out;
}

Dataset simulate(const DatasetConfig& cfg) {
    Dataset ds;
    ds.topology = generate_topology(cfg.n_services, cfg.edge_density, cfg.seed);
    ds.templates = default_templates(cfg.n_classes, cfg.seed + 1, cfg.noise_rate);
    ds.cases = generate_dataset(ds.topology, ds.templates, cfg.n_failures, cfg.seed + 2);
    return ds;
}

namespace {

Json truth_to_json(const CaseTruth& t) {
    Json links = Json::array();
    for (const auto& [a, b] : t.causal_links) links.push_back(Json::array({a, b}));
    return Json{{"failure_id", t.failure_id},
                {"fault_class", t.fault_class},
                {"root_event_id", t.root_event_id},
                {"alarm_event_id", t.alarm_event_id},
                {"propagation_path", t.propagation_path},
                {"path_event_ids", t.path_event_ids},
                {"causal_links", links},
                {"fault_event_ids", t.fault_event_ids}};
}

CaseTruth truth_from_json(const Json& j) {
    CaseTruth t;
    t.failure_id = j.at("failure_id").get<std::string>();
    t.fault_class = j.at("fault_class").get<std::string>();
    t.root_event_id = j.at("root_event_id").get<std::string>();
    t.alarm_event_id = j.at("alarm_event_id").get<std::string>();
    t.propagation_path = j.at("propagation_path").get<std::vector<std::string>>();
    t.path_event_ids = j.at("path_event_ids").get<std::vector<std::string>>();
    for (const auto& l : j.at("causal_links")) t.causal_links.emplace_back(l.at(0).get<std::string>(), l.at(1).get<std::string>());
    t.fault_event_ids = j.at("fault_event_ids").get<std::vector<std::string>>();
    return t;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
    std::filesystem::create_directories(dir);
    save_events(dir / kEventsFile, ds.sequences());
    std::vector<RawRecordEntry> raws;
    for (const auto& c : ds.cases) {
        for (const auto& r : c.raw_records) raws.push_back({c.sequence.failure_id, r});
    }
    save_raw_records(dir / kRawRecordsFile, raws);

    Json cases = Json::array();
    std::map<std::string, std::size_t> per_class;
    for (const auto& c : ds.cases) {
        cases.push_back(truth_to_json(c.truth));
        ++per_class[c.truth.fault_class];
    }
    Json templates = Json::array();
    for (const auto& t : ds.templates) {
        Json rules = Json::array();
        for (const auto& r : t.rules) {
            rules.push_back(Json{{"trigger", r.trigger_type}, {"produced", r.produced_type},
                                 {"min_delay_ms", r.min_delay_ms}, {"max_delay_ms", r.max_delay_ms},
                                 {"probability", r.probability}, {"locality", to_string(r.locality)}});
        }
        templates.push_back(Json{{"class_id", t.class_id}, {"root_event_type", t.root_event_type},
                                 {"noise_rate", t.noise_rate}, {"rules", rules}});
    }
    write_json(dir / kGroundTruthFile, Json{{"cases", cases}, {"class_counts", Json(per_class)}, {"templates", templates}});
    write_json(dir / kTopologyFile, to_json(ds.topology));
}

std::map<std::string, CaseTruth> load_ground_truth(const std::filesystem::path& path) {
    const Json j = read_json(path);
    std::map<std::string, CaseTruth> out;
    try {
        for (const auto& c : j.at("cases")) {
            auto t = truth_from_json(c);
            out[t.failure_id] = std::move(t);
        }
    } catch (const Json::exception& e) {
        throw DataError("malformed ground truth: " + std::string(e.what()));
    }
    return out;
}

}  // namespace kgroot
