#include "dispersim/graph.hpp"

#include <algorithm>
#include <set>

namespace dispersim {

DirectedGraph DirectedGraph::build(const Spec& spec) {
  DirectedGraph g;
  for (const auto& [id, color] : spec.vertices) {
    if (g.vertex_lookup_.count(id))
      throw GraphError("duplicate vertex id: " + id);
    g.vertex_lookup_[id] = VertexId(g.vertex_names_.size());
    g.vertex_names_.push_back(id);
    g.colors_.push_back(color);
  }
  g.out_.resize(g.vertex_names_.size());
  g.in_.resize(g.vertex_names_.size());
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& [tail, head] : spec.arrows) {
    auto it_t = g.vertex_lookup_.find(tail);
    auto it_h = g.vertex_lookup_.find(head);
    if (it_t == g.vertex_lookup_.end())
      throw GraphError("arrow references unknown vertex: " + tail);
    if (it_h == g.vertex_lookup_.end())
      throw GraphError("arrow references unknown vertex: " + head);
    if (it_t->second == it_h->second)
      throw GraphError("self-loop forbidden: (" + tail + "," + head + ")");
    if (!seen.insert({it_t->second, it_h->second}).second)
      throw GraphError("duplicate arrow: (" + tail + "," + head + ")");
    ArrowId a = ArrowId(g.arrows_.size());
    g.arrows_.push_back({it_t->second, it_h->second});
    g.out_[it_t->second].push_back(a);
    g.in_[it_h->second].push_back(a);
  }
  return g;
}

std::string DirectedGraph::arrow_name(ArrowId a) const {
  return vertex_names_[arrows_[a].tail] + "->" + vertex_names_[arrows_[a].head];
}

VertexId DirectedGraph::vertex_index(const std::string& name) const {
  auto it = vertex_lookup_.find(name);
  if (it == vertex_lookup_.end()) throw GraphError("unknown vertex: " + name);
  return it->second;
}

ArrowId DirectedGraph::arrow_index(const std::string& tail,
                                   const std::string& head) const {
  VertexId t = vertex_index(tail), h = vertex_index(head);
  for (ArrowId a : out_[t])
    if (arrows_[a].head == h) return a;
  throw GraphError("unknown arrow: (" + tail + "," + head + ")");
}

std::vector<VertexId> DirectedGraph::sources() const {
  std::vector<VertexId> s;
  for (VertexId v = 0; v < n_vertices(); ++v)
    if (in_[v].empty()) s.push_back(v);
  return s;
}

std::vector<VertexId> DirectedGraph::sinks() const {
  std::vector<VertexId> s;
  for (VertexId v = 0; v < n_vertices(); ++v)
    if (out_[v].empty()) s.push_back(v);
  return s;
}

SystemState SystemState::zero(const DirectedGraph& g) {
  SystemState s;
  s.counts.assign(g.n_vertices(), 0);
  s.flows.assign(g.n_arrows(), 0);
  return s;
}

const char* to_string(GroupKind k) {
  switch (k) {
    case GroupKind::OutgoingStar: return "outgoing-star";
    case GroupKind::IncomingStar: return "incoming-star";
    case GroupKind::ColorMatchedBounded: return "color-matched-bounded";
    case GroupKind::ColorMatchedUnbounded: return "color-matched-unbounded";
    case GroupKind::Singleton: return "singleton";
  }
  return "?";
}

std::vector<ArrowGroup> partition_arrow_groups(const DirectedGraph& g,
                                               const GroupingPolicy& policy) {
  std::vector<ArrowGroup> groups;
  std::vector<bool> assigned(g.n_arrows(), false);
  for (const auto& gs : policy.groups) {
    ArrowGroup grp;
    grp.kind = gs.kind;
    for (const auto& [tail, head] : gs.members) {
      ArrowId a = g.arrow_index(tail, head);
      if (assigned[a])
        throw GraphError("arrow in two groups: " + g.arrow_name(a));
      assigned[a] = true;
      grp.members.push_back(a);
    }
    if (grp.members.empty()) throw GraphError("empty arrow group");

    switch (grp.kind) {
      case GroupKind::Singleton:
        if (grp.members.size() != 1)
          throw GraphError("singleton group must have one member");
        break;
      case GroupKind::OutgoingStar: {
        VertexId tail = g.arrow(grp.members[0]).tail;
        for (ArrowId a : grp.members)
          if (g.arrow(a).tail != tail)
            throw GraphError("outgoing-star members must share one tail");
        break;
      }
      case GroupKind::IncomingStar: {
        VertexId head = g.arrow(grp.members[0]).head;
        for (ArrowId a : grp.members)
          if (g.arrow(a).head != head)
            throw GraphError("incoming-star members must share one head");
        break;
      }
      case GroupKind::ColorMatchedBounded:
      case GroupKind::ColorMatchedUnbounded: {
        const auto& tail_color = g.vertex_color(g.arrow(grp.members[0]).tail);
        const auto& head_color = g.vertex_color(g.arrow(grp.members[0]).head);
        for (ArrowId a : grp.members) {
          if (g.vertex_color(g.arrow(a).tail) != tail_color ||
              g.vertex_color(g.arrow(a).head) != head_color)
            throw GraphError("color-matched members must share tail and head colors");
        }
        // pairwise non-adjacent: no shared endpoint between any two members
        for (std::size_t i = 0; i < grp.members.size(); ++i) {
          for (std::size_t j = i + 1; j < grp.members.size(); ++j) {
            const Arrow& x = g.arrow(grp.members[i]);
            const Arrow& y = g.arrow(grp.members[j]);
            if (x.tail == y.tail || x.tail == y.head || x.head == y.tail ||
                x.head == y.head)
              throw GraphError("color-matched group has adjacent arrows");
          }
        }
        break;
      }
    }
    groups.push_back(std::move(grp));
  }
  for (ArrowId a = 0; a < g.n_arrows(); ++a)
    if (!assigned[a])
      throw GraphError("arrow not covered by any group: " + g.arrow_name(a));
  return groups;
}

void apply_increments(const DirectedGraph& g, SystemState& s,
                      std::span<const std::int64_t> deltas,
                      const std::vector<bool>& bounded_tail,
                      const std::vector<bool>& ignored_count) {
  auto ignored = [&](VertexId v) {
    return !ignored_count.empty() && ignored_count[std::size_t(v)];
  };
  // validate before mutating
  std::vector<std::int64_t> outflow(g.n_vertices(), 0);
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    if (deltas[a] < 0) throw GraphError("negative increment");
    outflow[g.arrow(a).tail] += deltas[a];
  }
  for (VertexId v = 0; v < g.n_vertices(); ++v) {
    if (bounded_tail[v] && !ignored(v) && outflow[v] > s.counts[v])
      throw GraphError("outflow exceeds count at bounded vertex " +
                       g.vertex_name(v));
  }
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    if (deltas[a] == 0) continue;
    s.flows[a] += deltas[a];
    const Arrow& ar = g.arrow(a);
    if (!ignored(ar.tail)) s.counts[ar.tail] -= deltas[a];
    s.counts[ar.head] += deltas[a];
  }
}

std::vector<std::int64_t> counts_from_flows(const DirectedGraph& g,
                                            std::span<const std::int64_t> init_counts,
                                            std::span<const std::int64_t> flows,
                                            const std::vector<bool>& ignored_count) {
  std::vector<std::int64_t> counts(init_counts.begin(), init_counts.end());
  for (ArrowId a = 0; a < g.n_arrows(); ++a) {
    const Arrow& ar = g.arrow(a);
    if (ignored_count.empty() || !ignored_count[std::size_t(ar.tail)])
      counts[ar.tail] -= flows[a];
    counts[ar.head] += flows[a];
  }
  return counts;
}

}  // namespace dispersim
