#ifndef DISPERSIM_MODEL_IO_HPP
#define DISPERSIM_MODEL_IO_HPP

#include <memory>
#include <string>

#include "dispersim/model.hpp"
#include "dispersim/simulator.hpp"

namespace dispersim {

// A model plus the shared time-varying inputs its rate expressions
// reference. The Model stores raw pointers into these objects, so the
// bundle owns them for the model's lifetime.
struct ModelBundle {
  std::shared_ptr<CovariateTable> covariates;
  std::shared_ptr<SeasonalForcing> forcing;
  Model model;
};

// Schema documented in the README: vertices, arrows, groups (kind,
// members, kernel), params, rates keyed "tail->head", optional
// covariates {file, interp} and forcing {p, calendar}.
ModelBundle load_model_json(const std::string& path);

// {"time": t, "counts": {vertex: n, ...}}; omitted vertices get 0.
SystemState load_state_json(const std::string& path, const DirectedGraph& g);

// {"t0","t1","dt","seed","replicates","record_every" | "record_times"}.
SimulationPlan load_plan_json(const std::string& path);

// Replaces model parameter defaults by name from {"name": value, ...}.
void apply_params_json(const std::string& path, Model& model);

}  // namespace dispersim

#endif
