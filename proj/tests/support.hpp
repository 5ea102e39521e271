#pragma once

// Shared helpers for the test binaries.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "qvp/generators.hpp"
#include "qvp/policy.hpp"
#include "qvp/training.hpp"

namespace qvp::testing {

inline std::string fixture(const std::string& name) { return read_file(std::string(QVP_FIXTURES) + "/" + name); }

inline Domain fixture_domain(const std::string& name) { return parse_domain(fixture(name), name); }

inline GroundTask gripper_one_ball() {
  const Domain d = fixture_domain("gripper-domain.pddl");
  return ground(d, parse_instance(fixture("gripper-1ball.pddl"), d));
}

inline Parameter& find_parameter(Model& m, const std::string& name) {
  for (auto& p : m.parameters()) {
    if (p.name == name) return p;
  }
  throw Error("no parameter " + name);
}

/// States reached by a seeded random walk, including the start.
inline std::vector<State> random_walk(const GroundTask& task, int steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<State> out{task.init};
  for (int i = 0; i < steps; ++i) {
    const auto app = applicable_actions(task, out.back());
    if (app.empty()) break;
    out.push_back(apply(task, out.back(), app[rng.below(app.size())]));
  }
  return out;
}

/// Same task with the object list permuted, so ground indices differ.
inline Instance permute_objects(const Instance& inst, std::uint64_t seed) {
  Instance out = inst;
  Rng rng(seed);
  rng.shuffle(out.objects);
  rng.shuffle(out.init);
  return out;
}

inline State map_state(const GroundTask& from, const GroundTask& to, const State& s) {
  std::vector<AtomId> atoms;
  for (AtomId a : s.atoms()) atoms.push_back(*to.find_atom(from.atom_name(a)));
  return State(std::move(atoms));
}

struct GradientCheck {
  std::size_t checked = 0;
  std::size_t violations = 0;
  double worst_relative = 0.0;
  std::string worst_parameter;
  std::size_t kinks = 0;  // entries accepted after a kink re-check
};

/// Compares backprop gradients of the batch objective against central
/// differences for every parameter entry. Passing entries satisfy
/// |analytic - numeric| <= max(rel * max(|analytic|, |numeric|), abs_floor).
///
/// With `kink_recheck`, an entry failing at `step` is accepted when its
/// one-sided differences at `step` disagree (a max or hinge switch lies inside
/// the stencil) and the central difference at step/10 or step/100 passes.
inline GradientCheck check_gradients(Model& model, const std::vector<EncodedTuple>& tuples, const LossConfig& cfg,
                                     double step = 1e-5, double rel = 1e-4, double abs_floor = 1e-7,
                                     bool kink_recheck = false) {
  std::vector<const EncodedTuple*> ptrs;
  for (const auto& t : tuples) ptrs.push_back(&t);
  model.zero_grad();
  {
    Tape tape;
    const BatchLoss bl = batch_loss(model, tape, ptrs, cfg);
    tape.backward(bl.objective);
  }
  auto objective = [&] {
    Tape tape(false);
    return batch_loss(model, tape, ptrs, cfg).objective.value().data[0];
  };
  GradientCheck r;
  for (auto& p : model.parameters()) {
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double original = p.value.data[j];
      auto differences = [&](double h) {
        p.value.data[j] = original + h;
        const double up = objective();
        p.value.data[j] = original - h;
        const double down = objective();
        p.value.data[j] = original;
        return std::pair{up, down};
      };
      const double analytic = p.grad.data[j];
      auto passes = [&](double numeric) {
        const double scale = std::max(std::fabs(analytic), std::fabs(numeric));
        return std::fabs(analytic - numeric) <= std::max(rel * scale, abs_floor);
      };
      const auto [up, down] = differences(step);
      const double numeric = (up - down) / (2.0 * step);
      const double err = std::fabs(analytic - numeric);
      const double scale = std::max(std::fabs(analytic), std::fabs(numeric));
      ++r.checked;
      if (!passes(numeric)) {
        bool accepted = false;
        if (kink_recheck) {
          const double center = objective();
          const double right = (up - center) / step, left = (center - down) / step;
          const bool kink = std::fabs(right - left) > std::max(rel * std::max(std::fabs(right), std::fabs(left)), abs_floor);
          for (double h : {step / 10, step / 100}) {
            if (accepted || !kink) break;
            const auto [u, d] = differences(h);
            accepted = passes((u - d) / (2.0 * h));
          }
        }
        if (accepted) {
          ++r.kinks;
          continue;
        }
        ++r.violations;
      }
      const double relative = scale > 0 ? err / scale : 0.0;
      if (err > abs_floor && relative > r.worst_relative) {
        r.worst_relative = relative;
        r.worst_parameter = p.name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return r;
}

/// Exact values from uniform-cost search: Q(s,a) = cost(a) + h*(s').
class OracleEstimator : public Estimator {
 public:
  explicit OracleEstimator(Head head, double dead_end = 1e6) : head_(head), dead_end_(dead_end) {}
  Head head() const override { return head_; }
  std::vector<double> state_values(const GroundTask& task, const std::vector<State>& states,
                                   ForwardStats& stats) const override {
    std::vector<double> out;
    for (const auto& s : states) out.push_back(value(task, s));
    stats.encoder_calls += states.size();
    return out;
  }
  std::vector<double> action_values(const GroundTask& task, const State& s, const std::vector<ActionId>& actions,
                                    ForwardStats& stats) const override {
    std::vector<double> out;
    for (ActionId a : actions) out.push_back(task.actions[a].cost + value(task, apply(task, s, a)));
    stats.encoder_calls += 1;
    return out;
  }

 private:
  double value(const GroundTask& task, const State& s) const {
    const HeuristicValue h = optimal_cost_oracle(task, s);
    return h.is_infinite() ? dead_end_ : static_cast<double>(h.value());
  }
  Head head_;
  double dead_end_;
};

}  // namespace qvp::testing
