#include "kgroot/event.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "kgroot/error.hpp"

namespace kgroot {

using nlohmann::json;

bool event_before(const Event& a, const Event& b) {
    if (a.timestamp_ms != b.timestamp_ms) return a.timestamp_ms < b.timestamp_ms;
    return a.event_id < b.event_id;
}

const Event* EventSequence::find(const std::string& event_id) const {
    for (const auto& e : events) {
        if (e.event_id == event_id) return &e;
    }
    return nullptr;
}

void sort_events(EventSequence& seq) { std::sort(seq.events.begin(), seq.events.end(), event_before); }

bool is_sorted(const EventSequence& seq) {
    return std::is_sorted(seq.events.begin(), seq.events.end(), event_before);
}

std::string to_string(RecordSource s) {
    switch (s) {
        case RecordSource::Metric: return "metric";
        case RecordSource::Log: return "log";
        case RecordSource::Activity: return "activity";
    }
    return "metric";
}

RecordSource record_source_from_string(const std::string& s) {
    if (s == "metric") return RecordSource::Metric;
    if (s == "log") return RecordSource::Log;
    if (s == "activity") return RecordSource::Activity;
    throw InvalidArgument("unknown record source: " + s);
}

TemplateCatalog::TemplateCatalog(std::vector<TemplateRule> rules) : rules_(std::move(rules)) {
    compiled_.reserve(rules_.size());
    for (const auto& r : rules_) {
        if (r.event_type.empty()) throw InvalidArgument("template rule without event type");
        compiled_.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::optimize);
    }
}

std::map<std::string, std::string> parse_payload_fields(const std::string& payload) {
    std::map<std::string, std::string> fields;
    std::istringstream in(payload);
    std::string token;
    while (in >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos || eq == 0) continue;
        fields[token.substr(0, eq)] = token.substr(eq + 1);
    }
    return fields;
}

namespace {

std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return v;
}

}  // namespace

std::optional<std::size_t> TemplateCatalog::match(const RawRecord& raw) const {
    std::optional<std::map<std::string, std::string>> fields;
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const auto& rule = rules_[i];
        if (rule.source && *rule.source != raw.source) continue;
        if (!std::regex_search(raw.payload, compiled_[i])) continue;
        if (rule.condition) {
            if (!fields) fields = parse_payload_fields(raw.payload);
            auto it = fields->find(rule.condition->key);
            if (it == fields->end()) continue;
            auto v = parse_double(it->second);
            if (!v || *v < rule.condition->min_value) continue;
        }
        return i;
    }
    return std::nullopt;
}

Event abstract_event(const RawRecord& raw, const TemplateCatalog& catalog, std::string event_id) {
    if (catalog.empty()) throw InvalidArgument("abstract_event: empty template catalog");
    if (raw.payload.empty()) throw InvalidArgument("abstract_event: empty payload");
    auto idx = catalog.match(raw);
    if (!idx) throw NoMatchingTemplate("no template matches payload '" + raw.payload + "'");
    const auto& rule = catalog.rules()[*idx];

    Event e;
    e.event_id = std::move(event_id);
    e.event_type = rule.event_type;
    e.entity = raw.entity;
    e.timestamp_ms = raw.timestamp_ms;
    if (!rule.extract_keys.empty()) {
        const auto fields = parse_payload_fields(raw.payload);
        for (const auto& key : rule.extract_keys) {
            if (auto it = fields.find(key); it != fields.end()) e.attributes[key] = it->second;
        }
    }
    return e;
}

AbstractionResult abstract_records(const std::vector<RawRecord>& raws,
                                   const TemplateCatalog& catalog,
                                   const std::string& id_prefix,
                                   UnmatchedPolicy policy) {
    AbstractionResult out;
    out.events.reserve(raws.size());
    for (std::size_t i = 0; i < raws.size(); ++i) {
        try {
            out.events.push_back(abstract_event(raws[i], catalog, id_prefix + std::to_string(i)));
        } catch (const NoMatchingTemplate&) {
            if (policy == UnmatchedPolicy::Strict) throw;
            ++out.dropped;
        }
    }
    return out;
}

namespace {

const json& require(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    const auto& v = require(obj, key, line);
    if (!v.is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

std::vector<EventSequence> read_events(std::istream& in) {
    std::vector<EventSequence> out;
    std::unordered_map<std::string, std::size_t> index;
    std::unordered_map<std::string, std::unordered_set<std::string>> seen_ids;

    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(line, e.what());
        }
        if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");

        Event e;
        const std::string failure_id = require_string(obj, "failure_id", line);
        e.event_id = require_string(obj, "event_id", line);
        e.event_type = require_string(obj, "event_type", line);
        e.entity = require_string(obj, "entity", line);
        const auto& ts = require(obj, "timestamp_ms", line);
        if (!ts.is_number_integer()) throw ParseError(line, "timestamp_ms must be an integer");
        e.timestamp_ms = ts.get<std::int64_t>();
        if (failure_id.empty() || e.event_id.empty() || e.event_type.empty()) {
            throw ParseError(line, "failure_id, event_id and event_type must be non-empty");
        }
        if (e.timestamp_ms < 0) throw ParseError(line, "timestamp_ms must be non-negative");
        if (auto it = obj.find("attributes"); it != obj.end() && !it->is_null()) {
            if (!it->is_object()) throw ParseError(line, "attributes must be an object");
            for (const auto& [k, v] : it->items()) {
                if (!v.is_string()) throw ParseError(line, "attribute values must be strings");
                e.attributes[k] = v.get<std::string>();
            }
        }

        auto [pos, inserted] = index.try_emplace(failure_id, out.size());
        if (inserted) {
            out.emplace_back();
            out.back().failure_id = failure_id;
        }
        auto& seq = out[pos->second];
        if (!seen_ids[failure_id].insert(e.event_id).second) {
            throw DuplicateEventId("line " + std::to_string(line) + ": duplicate event_id '" + e.event_id +
                                   "' in failure '" + failure_id + "'");
        }
        if (auto it = obj.find("fault_class"); it != obj.end() && !it->is_null()) {
            if (!it->is_string()) throw ParseError(line, "fault_class must be a string");
            const auto fc = it->get<std::string>();
            if (seq.fault_class && *seq.fault_class != fc) {
                throw ParseError(line, "conflicting fault_class for failure '" + failure_id + "'");
            }
            seq.fault_class = fc;
        }
        if (auto it = obj.find("is_alarm"); it != obj.end() && !it->is_null()) {
            if (!it->is_boolean()) throw ParseError(line, "is_alarm must be a boolean");
            if (it->get<bool>()) {
                if (seq.alarm_event_id) {
                    throw ParseError(line, "second alarm event in failure '" + failure_id + "'");
                }
                seq.alarm_event_id = e.event_id;
            }
        }
        seq.events.push_back(std::move(e));
    }
    for (auto& seq : out) sort_events(seq);
    return out;
}

std::vector<EventSequence> load_events(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open event file " + path.string());
    return read_events(in);
}

void write_events(std::ostream& out, const std::vector<EventSequence>& sequences) {
    for (const auto& seq : sequences) {
        for (const auto& e : seq.events) {
            json obj = json::object();
            obj["failure_id"] = seq.failure_id;
            obj["event_id"] = e.event_id;
            obj["event_type"] = e.event_type;
            obj["entity"] = e.entity;
            obj["timestamp_ms"] = e.timestamp_ms;
            obj["attributes"] = json(e.attributes);
            if (seq.fault_class) obj["fault_class"] = *seq.fault_class;
            if (seq.alarm_event_id && *seq.alarm_event_id == e.event_id) obj["is_alarm"] = true;
            out << obj.dump() << '\n';
        }
    }
}

void save_events(const std::filesystem::path& path, const std::vector<EventSequence>& sequences) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write event file " + path.string());
    write_events(out, sequences);
    if (!out) throw IoError("write failed for " + path.string());
}

void save_raw_records(const std::filesystem::path& path, const std::vector<RawRecordEntry>& records) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write raw record file " + path.string());
    for (const auto& r : records) {
        json obj = json::object();
        obj["failure_id"] = r.failure_id;
        obj["source"] = to_string(r.record.source);
        obj["entity"] = r.record.entity;
        obj["timestamp_ms"] = r.record.timestamp_ms;
        obj["payload"] = r.record.payload;
        out << obj.dump() << '\n';
    }
}

}  // namespace kgroot
