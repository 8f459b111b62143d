#pragma once

// JSON forms of the persistent artifacts. Objects use sorted keys so files
// diff cleanly and reruns are byte-identical.

#include <filesystem>

#include <json.hpp>

#include "kgroot/embedding.hpp"
#include "kgroot/fekg.hpp"
#include "kgroot/fpg.hpp"
#include "kgroot/relation.hpp"
#include "kgroot/rgcn.hpp"
#include "kgroot/stats.hpp"
#include "kgroot/topology.hpp"

namespace kgroot {

using Json = nlohmann::json;

Json to_json(const Event& e);
Event event_from_json(const Json& j);

Json to_json(const Fpg& g);
Fpg fpg_from_json(const Json& j);

Json to_json(const AbstractFpg& g);
AbstractFpg abstract_fpg_from_json(const Json& j);

Json to_json(const Fekg& kg);
Fekg fekg_from_json(const Json& j);

Json to_json(const EmbeddingTable& t);
EmbeddingTable embedding_from_json(const Json& j);

Json to_json(const SvmModel& m);
SvmModel svm_from_json(const Json& j);

Json to_json(const HistoricalStats& s);
HistoricalStats stats_from_json(const Json& j);

Json to_json(const Topology& t);
Topology topology_from_json(const Json& j);

Json to_json(const RgcnSimilarityModel& m);
RgcnSimilarityModel rgcn_from_json(const Json& j);

// Refuses (ModelMismatch) when the stored embedding checksum differs from
// the table's.
RgcnSimilarityModel rgcn_from_json(const Json& j, const EmbeddingTable& table);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace kgroot
