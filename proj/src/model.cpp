#include "dispersim/model.hpp"

#include <stdexcept>

namespace dispersim {

void Model::validate() {
  if (groups.size() != kernels.size())
    throw std::runtime_error("one kernel spec required per arrow group");

  ignored_count.assign(std::size_t(graph.n_vertices()), false);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const ArrowGroup& grp = groups[gi];
    const KernelSpec& ks = kernels[gi];
    ks.validate();

    if (ks.law == KernelLaw::SourcePoisson) {
      // the ignored-count convention: only a true source with a single
      // outgoing arrow can have its count bypassed
      if (grp.members.size() != 1)
        throw std::runtime_error("source-poisson groups are singletons");
      VertexId tail = graph.arrow(grp.members[0]).tail;
      if (!graph.is_source(tail))
        throw std::runtime_error("source-poisson requires a source-tail arrow");
      if (graph.outgoing(tail).size() != 1)
        throw std::runtime_error(
            "ignored-count source must have exactly one outgoing arrow");
      ignored_count[std::size_t(tail)] = true;
      continue;
    }

    switch (grp.kind) {
      case GroupKind::OutgoingStar:
        if (ks.law != KernelLaw::EquiMultinomial &&
            ks.law != KernelLaw::DirichletMultinomial)
          throw std::runtime_error("outgoing-star group needs a bounded star law");
        break;
      case GroupKind::IncomingStar:
        if (ks.law != KernelLaw::EquiNegMultinomial &&
            ks.law != KernelLaw::DirichletNegMultinomial)
          throw std::runtime_error("incoming-star group needs an unbounded star law");
        break;
      case GroupKind::ColorMatchedBounded:
        if (ks.law != KernelLaw::BetaBinomialShared &&
            ks.law != KernelLaw::EquiMultinomial)
          throw std::runtime_error(
              "color-matched-bounded group needs a bounded shared law");
        break;
      case GroupKind::ColorMatchedUnbounded:
        if (ks.law != KernelLaw::BetaNegBinomialShared &&
            ks.law != KernelLaw::EquiNegMultinomial)
          throw std::runtime_error(
              "color-matched-unbounded group needs an unbounded shared law");
        break;
      case GroupKind::Singleton:
        break;
    }
  }

  // Bounded laws draw against the tail count; to keep the ceiling exact,
  // all bounded-law arrows leaving one vertex must sit in a single group.
  bounded_tail.assign(std::size_t(graph.n_vertices()), false);
  std::vector<int> bounded_group_at(std::size_t(graph.n_vertices()), -1);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (!law_is_bounded(kernels[gi].law)) continue;
    for (ArrowId a : groups[gi].members) {
      VertexId tail = graph.arrow(a).tail;
      int& owner = bounded_group_at[std::size_t(tail)];
      if (owner >= 0 && owner != int(gi))
        throw std::runtime_error("vertex " + graph.vertex_name(tail) +
                                 " has bounded arrows in two groups");
      owner = int(gi);
      bounded_tail[std::size_t(tail)] = true;
    }
  }
  for (VertexId v = 0; v < graph.n_vertices(); ++v) {
    int owner = bounded_group_at[std::size_t(v)];
    if (owner < 0) continue;
    // every outgoing arrow of a bounded vertex must use that one group
    // unless it is explicitly unbounded, in which case the count may go
    // negative (unbounded laws carry no ceiling)
    for (ArrowId a : graph.outgoing(v)) {
      bool in_owner = false;
      for (ArrowId b : groups[std::size_t(owner)].members)
        if (a == b) in_owner = true;
      if (in_owner) continue;
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        if (law_is_bounded(kernels[gi].law)) {
          for (ArrowId b : groups[gi].members)
            if (a == b)
              throw std::runtime_error("vertex " + graph.vertex_name(v) +
                                       " has bounded arrows in two groups");
        }
      }
    }
  }

  for (ArrowId a = 0; a < graph.n_arrows(); ++a)
    if (!rates.has(a))
      throw std::runtime_error("no rate bound to arrow " + graph.arrow_name(a));
}

}  // namespace dispersim
