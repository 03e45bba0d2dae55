#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "illab/fit.hpp"
#include "illab/grid.hpp"
#include "illab/linear_op.hpp"
#include "illab/nonlinear_op.hpp"

namespace illab {

// Non-symmetric quasi-distance sup_{u in U} inf_{v in V} ||u - v||.
// Subspace components on the U side contribute seeded sample points (the sup
// over an unbounded set is approximated from below); on the V side the inf is
// computed exactly by orthogonal projection.
double qdist(const PreimageSet& U, const PreimageSet& V);

struct ProbeStep {
  int index = 0;
  double input_gap = 0.0;
  double output_gap = 0.0;
};

struct FamilyResult {
  std::string label;
  std::vector<ProbeStep> steps;
  std::string status;
  bool considered = false;
};

struct ProbeReport {
  std::string kind;     // stable_solvability | local_posedness
  std::string verdict;  // stable | unstable | inconclusive | well_posed | ill_posed
  std::string witness;  // decisive family, when any
  std::vector<ProbeStep> steps;  // steps of the decisive (or first) family
  std::vector<FamilyResult> families;
  std::string note;
};

struct SequenceSpec {
  int length = 12;
  double radius = 0.5;
  std::uint64_t seed = 0;
  // auto | bump | oscillatory; selects the autoconvolution direction family.
  std::string direction_family = "auto";
};

struct ProbeThresholds {
  double stable_tol = 1e-3;        // scaled by the size of F^{-1}(y)
  double witness_tol = 0.1;        // image-gap decay factor certifying a witness
  double divergence_factor = 10.0;
  double gap_shrink_required = 0.5;  // a sequence must at least halve its data gap
};

// Uniform handle over the example operators for the probe drivers.
struct StabilityProblem {
  std::optional<NonlinearOp> nonlinear;
  std::optional<LinearOp> linear;
  std::optional<SvdFactors> linear_svd;
  std::optional<GridFunction> known_solution;  // required for autoconvolution
  double feasibility_tol = 1e-8;

  GridFunction forward(const GridFunction& x) const;
  PreimageSet solve_preimage(const GridFunction& y) const;
};

StabilityProblem make_problem(const NonlinearOp& op);
StabilityProblem make_problem(const NonlinearOp& op, const GridFunction& xdag);
StabilityProblem make_problem(const LinearOp& op);

// Image-space probe: generates canonical in-range sequences y_n -> y and
// tracks qdist(F^{-1}(y_n), F^{-1}(y)). A verdict of "unstable" is a genuine
// witness; "stable" only reports that every canonical family behaved stably.
ProbeReport probe_stable_solvability(const StabilityProblem& problem, const GridFunction& y,
                                     const SequenceSpec& spec,
                                     const ProbeThresholds& thresholds = {});

// Solution-space probe: tracks ||F(x_n) - F(xdag)|| against ||x_n - xdag||
// for sequences on the sphere of radius r and for shrinking sequences.
// "ill_posed" is a witness; "well_posed" is a falsifiability verdict.
ProbeReport probe_local_posedness(const StabilityProblem& problem, const GridFunction& xdag,
                                  const SequenceSpec& spec,
                                  const ProbeThresholds& thresholds = {});

// CSV columns n,input_gap,output_gap; one commented block per family and a
// trailing verdict line.
void write_probe_csv(const ProbeReport& report, const std::string& path);

}  // namespace illab
