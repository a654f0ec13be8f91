#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gradflow/costs.hpp"
#include "gradflow/errors.hpp"
#include "gradflow/gains.hpp"
#include "gradflow/layout.hpp"

namespace gradflow {

/// The four continuous-time flows. `P` drives disagreement down with a
/// Laplacian consensus term (biased steady state for constant gains), `I`
/// enforces the edge constraints with integral multipliers (exact steady
/// state), `PI` combines both, and `PIL` is the combined flow with the
/// constraint written through the Laplacian: node-shaped multipliers, twice
/// the per-edge communication, no gain knobs.
enum class Method { P, I, PI, PIL };

Method parse_method(const std::string& name);  // "p", "i", "pi", "pil"
const char* method_name(Method method);

/// A fully specified flow: which method, which gains, over which layout.
struct MethodSpec {
  Method method = Method::PI;
  GainSchedule gains;
  std::shared_ptr<const AggregateLayout> layout;
};

/// Run-level validity rules: the gains each method actually uses must be
/// positive (P: k_P, I: k_I', PI: both), k_G(t) must stay positive, and PIL
/// admits only the full layout with all-default gains. Throws
/// ValidationError. Flow construction itself is more permissive so that
/// zero-gain reductions (PI with k_P = 0 vs I, etc.) remain expressible.
void validate_method_spec(const MethodSpec& spec);

/// Aggregate state of a flow. mu is empty for P, one entry per (edge,
/// variable) slot for I/PI, and z-shaped for PIL.
struct FlowState {
  std::vector<double> z;
  std::vector<double> mu;
};

/// Right-hand-side evaluator binding a method spec to a cost. Evaluation is
/// matrix-free: the gradient term scatters per-agent dependency gradients and
/// the consensus/multiplier terms are accumulated edge by edge. A Flow
/// instance is not reentrant (it carries scratch buffers); use one per
/// concurrent integration.
class Flow {
 public:
  Flow(MethodSpec spec, std::shared_ptr<const SeparableCost> cost);

  const MethodSpec& spec() const { return spec_; }
  const AggregateLayout& layout() const { return *spec_.layout; }
  const SeparableCost& cost() const { return *cost_; }

  /// All-zero state with the method's mu shape.
  FlowState initial_state() const;

  /// z-only override; mu starts at zero as the flows require.
  FlowState initial_state(const std::vector<double>& z0) const;

  /// Writes the state derivative into ds (resized as needed).
  ///   P:   dz = -k_G(t) grad f(z) - k_P L z
  ///   I:   dz = -k_G(t) grad f(z) - k_I' D mu,        dmu = k_I' D^T z
  ///   PI:  sum of the P and I terms
  ///   PIL: dz = -grad f(z) - L z - L mu,              dmu = L z
  void rhs(const FlowState& state, double t, FlowState& ds) const;

 private:
  MethodSpec spec_;
  std::shared_ptr<const SeparableCost> cost_;
  std::vector<std::vector<int>> agent_slots_;  // agent -> flat z slot per dependency entry
  mutable std::vector<double> x_dep_, g_dep_;  // scratch, sized to the largest dependency
};

/// Agent `agent`'s signed view of edge `edge_id`'s multiplier for variable
/// `variable`: +mu at the edge head, -mu at the tail, so the two endpoint
/// views are antisymmetric by construction. Only meaningful for I/PI states.
double multiplier_view(const AggregateLayout& layout, const FlowState& state, int agent,
                       int edge_id, int variable);

/// Scalars exchanged per neighbor message each step, indexed by base edge:
/// the shared state copies (n in full layouts, the number of co-tracked
/// variables in reduced ones), doubled for PIL where the node multiplier
/// travels alongside the state.
std::vector<int> count_communication(Method method, const AggregateLayout& layout);

}  // namespace gradflow
