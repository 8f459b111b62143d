#include "kgroot/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "kgroot/error.hpp"
#include "kgroot/serialize.hpp"

namespace kgroot {

std::vector<std::string> EvalCase::truths() const {
    if (!ground_truth_events.empty()) return {ground_truth_events.begin(), ground_truth_events.end()};
    return {ground_truth_class};
}

namespace {

void require_cases(const std::vector<EvalCase>& cases) {
    if (cases.empty()) throw EmptyCases("no evaluation cases");
}

// 1-based rank of each truth; len + 1 when missing.
std::vector<std::size_t> truth_ranks(const EvalCase& c) {
    std::vector<std::size_t> out;
    for (const auto& t : c.truths()) {
        auto it = std::find(c.predicted_ranking.begin(), c.predicted_ranking.end(), t);
        out.push_back(static_cast<std::size_t>(it - c.predicted_ranking.begin()) + 1);
    }
    return out;
}

bool hit_within(const EvalCase& c, std::size_t k) {
    for (auto r : truth_ranks(c)) {
        if (r <= k && r <= c.predicted_ranking.size()) return true;
    }
    return false;
}

}  // namespace

double a_at_k(const std::vector<EvalCase>& cases, std::size_t k) {
    require_cases(cases);
    if (k == 0) throw InvalidParams("a_at_k: k must be at least 1");
    std::size_t hits = 0;
    for (const auto& c : cases) hits += hit_within(c, k) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(cases.size());
}

double mar(const std::vector<EvalCase>& cases) {
    require_cases(cases);
    double total = 0.0;
    for (const auto& c : cases) {
        const auto ranks = truth_ranks(c);
        const double sum = static_cast<double>(std::accumulate(ranks.begin(), ranks.end(), std::size_t{0}));
        total += sum / static_cast<double>(ranks.size());
    }
    return total / static_cast<double>(cases.size());
}

Prf1 prf1(const std::vector<EvalCase>& cases, std::size_t k) {
    require_cases(cases);
    if (k == 0) throw InvalidParams("prf1: k must be at least 1");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (const auto& c : cases) {
        const bool hit = hit_within(c, k);
        if (hit) {
            ++tp;
        } else {
            ++fn;
            if (!c.predicted_ranking.empty()) ++fp;
        }
    }
    Prf1 out;
    if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    // Harmonic mean of precision and recall, in counts.
    if (tp > 0) out.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
    return out;
}

void SplitConfig::validate() const {
    if (train < 0.0 || validation < 0.0 || test < 0.0) throw InvalidParams("split fractions must be non-negative");
    if (std::abs(train + validation + test - 1.0) > 1e-9) throw InvalidParams("split fractions must sum to 1");
}

Split split(const std::vector<EventSequence>& failures, const SplitConfig& cfg) {
    cfg.validate();
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < failures.size(); ++i) {
        by_class[failures[i].fault_class.value_or("")].push_back(i);
    }
    std::mt19937_64 rng(cfg.seed);
    // Each member sits at (j + 1/2) / n inside its shuffled class; the global
    // order by that position is cut at the rounded targets.
    struct Slot {
        std::size_t index, j, n, cls;
    };
    std::vector<Slot> slots;
    std::size_t cls = 0;
    for (auto& [label, members] : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t j = 0; j < members.size(); ++j) slots.push_back({members[j], j, members.size(), cls});
        ++cls;
    }
    std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
        const auto ka = (2 * a.j + 1) * b.n, kb = (2 * b.j + 1) * a.n;
        if (ka != kb) return ka < kb;
        return a.cls < b.cls;
    });
    const double n = static_cast<double>(failures.size());
    const auto cut1 = static_cast<std::size_t>(std::llround(cfg.train * n));
    const auto cut2 = static_cast<std::size_t>(std::llround((cfg.train + cfg.validation) * n));
    std::vector<int> part(failures.size(), 2);
    for (std::size_t p = 0; p < slots.size(); ++p) part[slots[p].index] = p < cut1 ? 0 : (p < cut2 ? 1 : 2);
    Split out;
    for (std::size_t i = 0; i < failures.size(); ++i) {
        (part[i] == 0 ? out.train : part[i] == 1 ? out.validation : out.test).push_back(failures[i]);
    }
    return out;
}

MetricBundle metric_bundle(const std::vector<EvalCase>& class_cases, const std::vector<EvalCase>& event_cases) {
    MetricBundle m;
    m.cases = class_cases.size();
    m.a_at_1 = a_at_k(class_cases, 1);
    m.a_at_2 = a_at_k(class_cases, 2);
    m.a_at_3 = a_at_k(class_cases, 3);
    m.a_at_5 = a_at_k(class_cases, 5);
    m.mar = mar(class_cases);
    const auto p = prf1(class_cases);
    m.precision = p.precision;
    m.recall = p.recall;
    m.f1 = p.f1;
    if (!event_cases.empty()) {
        m.event_a_at_1 = a_at_k(event_cases, 1);
        m.event_a_at_3 = a_at_k(event_cases, 3);
        m.event_mar = mar(event_cases);
    }
    return m;
}

MetricBundle run_ablation(const Knowledge& kb,
                          const std::vector<EventSequence>& test,
                          const std::map<std::string, CaseTruth>& truths,
                          MatchVariant variant,
                          const DiagnoseConfig& cfg) {
    const ClassMatcher matcher(kb, variant);
    std::map<std::string, std::string> root_types;
    for (const auto& kg : kb.fekgs) root_types.emplace(kg.fault_class, kg.root_cause_type);
    const RelationContext ctx = kb.models.context();

    std::vector<EvalCase> class_cases, event_cases;
    for (const auto& seq : test) {
        if (!seq.fault_class) throw DataError("test failure " + seq.failure_id + " has no fault class");
        const Fpg online = build_fpg(seq, cfg.fpg, kb.models.relations, ctx, FpgMode::Online);
        const auto ranking = matcher.rank(online);

        EvalCase cc;
        cc.failure_id = seq.failure_id;
        cc.ground_truth_class = *seq.fault_class;
        for (const auto& s : ranking) cc.predicted_ranking.push_back(s.fault_class);
        class_cases.push_back(cc);

        auto truth = truths.find(seq.failure_id);
        if (truth == truths.end()) continue;
        EvalCase ec = cc;
        ec.ground_truth_events = {truth->second.root_event_id};
        ec.predicted_ranking.clear();
        const Event& alarm = alarm_of(seq);
        if (online.find(alarm.event_id)) {
            std::set<std::string> seen;
            for (std::size_t i = 0; i < ranking.size() && i < cfg.top_k; ++i) {
                for (const auto& r : rank_candidates(online, alarm, root_types.at(ranking[i].fault_class), cfg.weights)) {
                    if (seen.insert(r.candidate.event.event_id).second) ec.predicted_ranking.push_back(r.candidate.event.event_id);
                }
            }
        }
        event_cases.push_back(std::move(ec));
    }
    return metric_bundle(class_cases, event_cases);
}

namespace {

MetricBundle mean_of(const std::vector<MetricBundle>& xs) {
    MetricBundle m;
    if (xs.empty()) return m;
    const double n = static_cast<double>(xs.size());
    for (const auto& x : xs) {
        m.cases += x.cases;
        m.a_at_1 += x.a_at_1 / n;
        m.a_at_2 += x.a_at_2 / n;
        m.a_at_3 += x.a_at_3 / n;
        m.a_at_5 += x.a_at_5 / n;
        m.mar += x.mar / n;
        m.precision += x.precision / n;
        m.recall += x.recall / n;
        m.f1 += x.f1 / n;
        m.event_a_at_1 += x.event_a_at_1 / n;
        m.event_a_at_3 += x.event_a_at_3 / n;
        m.event_mar += x.event_mar / n;
    }
    return m;
}

}  // namespace

ExperimentResult run_experiment(const std::vector<EventSequence>& failures,
                                const std::map<std::string, CaseTruth>& truths,
                                const std::optional<Topology>& topology,
                                const ExperimentConfig& cfg) {
    ExperimentResult out;
    std::map<std::string, std::vector<MetricBundle>> per_variant;
    for (auto seed : cfg.seeds) {
        SplitConfig sc = cfg.split;
        sc.seed = seed;
        const Split parts = split(failures, sc);
        const Knowledge kb = build_knowledge(parts.train, parts.validation, truths, topology, cfg.build.reseeded(seed));
        SeedRun run;
        run.seed = seed;
        run.train = parts.train.size();
        run.validation = parts.validation.size();
        run.test = parts.test.size();
        for (auto v : cfg.variants) {
            auto m = run_ablation(kb, parts.test, truths, v, cfg.diagnose);
            per_variant[to_string(v)].push_back(m);
            run.variants[to_string(v)] = m;
        }
        out.runs.push_back(std::move(run));
    }
    for (const auto& [name, xs] : per_variant) out.mean[name] = mean_of(xs);
    return out;
}

nlohmann::json to_json(const MetricBundle& m) {
    return Json{{"cases", m.cases},       {"a_at_1", m.a_at_1},       {"a_at_2", m.a_at_2},
                {"a_at_3", m.a_at_3},     {"a_at_5", m.a_at_5},       {"mar", m.mar},
                {"precision", m.precision}, {"recall", m.recall},     {"f1", m.f1},
                {"event_a_at_1", m.event_a_at_1}, {"event_a_at_3", m.event_a_at_3}, {"event_mar", m.event_mar}};
}

nlohmann::json to_json(const ExperimentResult& r) {
    Json runs = Json::array();
    for (const auto& run : r.runs) {
        Json variants = Json::object();
        for (const auto& [name, m] : run.variants) variants[name] = to_json(m);
        runs.push_back(Json{{"seed", run.seed}, {"train", run.train}, {"validation", run.validation},
                            {"test", run.test}, {"variants", variants}});
    }
    Json mean = Json::object();
    for (const auto& [name, m] : r.mean) mean[name] = to_json(m);
    return Json{{"runs", runs}, {"mean", mean}};
}

std::string render_table(const ExperimentResult& r) {
    std::ostringstream out;
    out << std::left << std::setw(8) << "variant" << std::right;
    for (const char* h : {"A@1", "A@2", "A@3", "A@5", "MAR", "P", "R", "F1", "evA@1", "evA@3", "evMAR"}) {
        out << std::setw(8) << h;
    }
    out << "\n" << std::fixed << std::setprecision(3);
    for (const auto& [name, m] : r.mean) {
        out << std::left << std::setw(8) << name << std::right;
        for (double v : {m.a_at_1, m.a_at_2, m.a_at_3, m.a_at_5, m.mar, m.precision, m.recall, m.f1,
                         m.event_a_at_1, m.event_a_at_3, m.event_mar}) {
            out << std::setw(8) << v;
        }
        out << "\n";
    }
    out << "(mean over " << r.runs.size() << " seeds)\n";
    return out.str();
}

std::string render_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "seed,variant,cases,a_at_1,a_at_2,a_at_3,a_at_5,mar,precision,recall,f1,event_a_at_1,event_a_at_3,event_mar\n";
    out << std::setprecision(6);
    auto row = [&](const std::string& seed, const std::string& name, const MetricBundle& m) {
        out << seed << "," << name << "," << m.cases << "," << m.a_at_1 << "," << m.a_at_2 << "," << m.a_at_3 << ","
            << m.a_at_5 << "," << m.mar << "," << m.precision << "," << m.recall << "," << m.f1 << ","
            << m.event_a_at_1 << "," << m.event_a_at_3 << "," << m.event_mar << "\n";
    };
    for (const auto& run : r.runs) {
        for (const auto& [name, m] : run.variants) row(std::to_string(run.seed), name, m);
    }
    for (const auto& [name, m] : r.mean) row("mean", name, m);
    return out.str();
}

}  // namespace kgroot
