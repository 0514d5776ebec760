#ifndef DISPERSIM_GRAPH_HPP
#define DISPERSIM_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dispersim {

using VertexId = int;  // dense index into DirectedGraph::vertices
using ArrowId = int;   // dense index into DirectedGraph::arrows

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Arrow {
  VertexId tail;
  VertexId head;
};

// Finite directed graph with vertex coloring. Vertices and arrows are
// declared with stable string names and mapped to dense indices;
// immutable after construction.
class DirectedGraph {
 public:
  struct Spec {
    std::vector<std::pair<std::string, std::string>> vertices;  // (id, color)
    std::vector<std::pair<std::string, std::string>> arrows;    // (tail, head)
  };

  static DirectedGraph build(const Spec& spec);

  int n_vertices() const { return int(vertex_names_.size()); }
  int n_arrows() const { return int(arrows_.size()); }

  const std::string& vertex_name(VertexId v) const { return vertex_names_[v]; }
  const std::string& vertex_color(VertexId v) const { return colors_[v]; }
  const Arrow& arrow(ArrowId a) const { return arrows_[a]; }
  std::string arrow_name(ArrowId a) const;

  VertexId vertex_index(const std::string& name) const;
  ArrowId arrow_index(const std::string& tail, const std::string& head) const;

  const std::vector<ArrowId>& outgoing(VertexId v) const { return out_[v]; }
  const std::vector<ArrowId>& incoming(VertexId v) const { return in_[v]; }

  // S_o: no incoming arrows; S_i: no outgoing arrows.
  std::vector<VertexId> sources() const;
  std::vector<VertexId> sinks() const;

  bool is_source(VertexId v) const { return in_[v].empty(); }
  bool is_sink(VertexId v) const { return out_[v].empty(); }

 private:
  std::vector<std::string> vertex_names_;
  std::vector<std::string> colors_;
  std::vector<Arrow> arrows_;
  std::vector<std::vector<ArrowId>> out_;
  std::vector<std::vector<ArrowId>> in_;
  std::unordered_map<std::string, VertexId> vertex_lookup_;
};

// Counts per vertex plus cumulative flows per arrow at a point in time.
// A plain value: particles and replicates copy it freely.
struct SystemState {
  double time = 0.0;
  std::vector<std::int64_t> counts;  // indexed by VertexId
  std::vector<std::int64_t> flows;   // indexed by ArrowId, N(0) = 0

  static SystemState zero(const DirectedGraph& g);
};

enum class GroupKind {
  OutgoingStar,
  IncomingStar,
  ColorMatchedBounded,
  ColorMatchedUnbounded,
  Singleton,
};

const char* to_string(GroupKind k);

// A unit of joint sampling: one star, one color-matched family, or a
// lone arrow. Every arrow of a model belongs to exactly one group.
struct ArrowGroup {
  GroupKind kind;
  std::vector<ArrowId> members;
};

struct GroupingPolicy {
  struct GroupSpec {
    GroupKind kind;
    std::vector<std::pair<std::string, std::string>> members;  // (tail, head)
  };
  std::vector<GroupSpec> groups;
};

// Validates and materializes the partition:
//  - exhaustive and disjoint over all arrows
//  - outgoing stars share one tail, incoming stars one head
//  - color-matched groups are pairwise non-adjacent with matching
//    tail colors and matching head colors
std::vector<ArrowGroup> partition_arrow_groups(const DirectedGraph& g,
                                               const GroupingPolicy& policy);

// Applies one step's arrow increments through the balance identity.
// `bounded_tail[v]` marks vertices whose outflow may not exceed the
// current count (binomial-family kernels). `ignored_count[v]` marks
// source vertices under the conventional infinite/ignored-count rule
// (rate-governed inflow): their counts are neither checked nor drawn
// down. Empty vectors mean no vertex has the property.
void apply_increments(const DirectedGraph& g, SystemState& s,
                      std::span<const std::int64_t> deltas,
                      const std::vector<bool>& bounded_tail,
                      const std::vector<bool>& ignored_count = {});

// Recomputes counts from initial counts and flows; used by tests to
// confirm the balance identity holds exactly.
std::vector<std::int64_t> counts_from_flows(const DirectedGraph& g,
                                            std::span<const std::int64_t> init_counts,
                                            std::span<const std::int64_t> flows,
                                            const std::vector<bool>& ignored_count = {});

}  // namespace dispersim

#endif
