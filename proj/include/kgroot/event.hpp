#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace kgroot {

// Template class of an event, e.g. "CPU_OVERLOAD".
struct EventType {
    std::string id;
    std::string description;
};

// A timestamped occurrence of an event type on one entity.
struct Event {
    std::string event_id;
    std::string event_type;
    std::string entity;
    std::int64_t timestamp_ms = 0;
    std::map<std::string, std::string> attributes;

    bool operator==(const Event&) const = default;
};

// Total order used everywhere events are sequenced: timestamp, then id.
bool event_before(const Event& a, const Event& b);

// Events of one failure window, sorted by event_before.
struct EventSequence {
    std::string failure_id;
    std::vector<Event> events;
    std::optional<std::string> fault_class;
    std::optional<std::string> alarm_event_id;

    const Event* find(const std::string& event_id) const;
    bool operator==(const EventSequence&) const = default;
};

void sort_events(EventSequence& seq);
bool is_sorted(const EventSequence& seq);

enum class RecordSource { Metric, Log, Activity };

std::string to_string(RecordSource s);
RecordSource record_source_from_string(const std::string& s);

// Unstructured telemetry before abstraction.
struct RawRecord {
    RecordSource source = RecordSource::Metric;
    std::string entity;
    std::int64_t timestamp_ms = 0;
    std::string payload;
};

// Numeric guard on a "key=value" field of the payload.
struct NumericCondition {
    std::string key;
    double min_value = 0.0;
};

// One abstraction rule. A record matches when its source agrees (if set),
// the payload contains a match for `pattern`, and the numeric condition (if
// set) holds. Keys listed in `extract_keys` are copied from the payload's
// "key=value" fields into the event attributes.
struct TemplateRule {
    std::optional<RecordSource> source;
    std::string pattern;
    std::string event_type;
    std::optional<NumericCondition> condition;
    std::vector<std::string> extract_keys;
};

// Rules compiled once; first matching rule wins.
class TemplateCatalog {
public:
    explicit TemplateCatalog(std::vector<TemplateRule> rules);

    const std::vector<TemplateRule>& rules() const noexcept { return rules_; }
    bool empty() const noexcept { return rules_.empty(); }

    // Index of the first matching rule, if any.
    std::optional<std::size_t> match(const RawRecord& raw) const;

private:
    std::vector<TemplateRule> rules_;
    std::vector<std::regex> compiled_;
};

// Parses whitespace-separated "key=value" tokens of a payload.
std::map<std::string, std::string> parse_payload_fields(const std::string& payload);

// Throws NoMatchingTemplate when no rule applies, InvalidArgument on an
// empty catalog or payload.
Event abstract_event(const RawRecord& raw, const TemplateCatalog& catalog, std::string event_id);

enum class UnmatchedPolicy { Drop, Strict };

struct AbstractionResult {
    std::vector<Event> events;
    std::size_t dropped = 0;
};

// Abstracts a batch of records. Event ids are `<id_prefix><index>` using the
// record's position in the input.
AbstractionResult abstract_records(const std::vector<RawRecord>& raws,
                                   const TemplateCatalog& catalog,
                                   const std::string& id_prefix,
                                   UnmatchedPolicy policy = UnmatchedPolicy::Drop);

// Line-delimited JSON event files. One object per line with keys
// failure_id, event_id, event_type, entity, timestamp_ms, attributes and the
// optional fault_class and is_alarm. Sequences come back in order of first
// appearance, each sorted by event_before.
std::vector<EventSequence> read_events(std::istream& in);
std::vector<EventSequence> load_events(const std::filesystem::path& path);

void write_events(std::ostream& out, const std::vector<EventSequence>& sequences);
void save_events(const std::filesystem::path& path, const std::vector<EventSequence>& sequences);

// Raw record files use the same line-delimited layout: source, entity,
// timestamp_ms, payload, plus a failure_id for grouping.
struct RawRecordEntry {
    std::string failure_id;
    RawRecord record;
};
void save_raw_records(const std::filesystem::path& path, const std::vector<RawRecordEntry>& records);

}  // namespace kgroot
