#ifndef SLOTFILL_GRADCHECK_HPP
#define SLOTFILL_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slotfill/model.hpp"
#include "slotfill/types.hpp"

namespace slotfill {

struct GradCheckOptions {
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  double l2_reg = 0.0;
  bool reg_window = false;
  // When set, this gradient tensor is corrupted before comparison; the check
  // is then expected to fail (negative control for the harness itself).
  std::string corrupt_tensor;
};

struct GradCheckEntry {
  std::string tensor;
  double max_rel_err = 0.0;
  Index worst_index = -1;
  double analytic = 0.0, numeric = 0.0;  // at the worst element
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;

  double worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.max_rel_err);
    return w;
  }
  bool passed() const { return worst() < tolerance; }
};

// Mean per-utterance loss over the batch plus the L2 penalty — the exact
// objective one optimizer step sees.
inline double gradcheck_objective(const Model& model,
                                  const std::vector<std::vector<int>>& words,
                                  const std::vector<std::vector<int>>& labels,
                                  double l2_reg, bool reg_window) {
  require(!words.empty() && words.size() == labels.size(),
          "gradient check needs a non-empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i)
    total += model.loss(model.forward(words[i], words[i].size()), labels[i]);
  return total / double(words.size()) +
         regularization_penalty(model, l2_reg, reg_window);
}

// Central-difference check of every trainable tensor against the analytic
// backward pass. Dropout is off: the objective must be deterministic.
inline GradCheckReport grad_check(Model& model,
                                  const std::vector<std::vector<int>>& words,
                                  const std::vector<std::vector<int>>& labels,
                                  const GradCheckOptions& opt = {}) {
  const double scale = 1.0 / double(words.size());
  Model grads = model.zeros_like();
  for (std::size_t i = 0; i < words.size(); ++i) {
    ModelTape tape;
    model.forward(words[i], words[i].size(), nullptr, &tape);
    model.backward(tape, labels[i], scale, grads);
  }
  add_regularization_gradient(model, opt.l2_reg, opt.reg_window, grads);

  if (!opt.corrupt_tensor.empty()) {
    bool found = false;
    for (TensorRef t : grads.tensors()) {
      if (t.name == opt.corrupt_tensor) {
        t.data[0] += 1.0;
        found = true;
        break;
      }
    }
    require(found, "unknown tensor for corruption: " + opt.corrupt_tensor);
  }

  GradCheckReport report;
  report.tolerance = opt.tolerance;
  auto params = model.tensors();
  auto analytic = grads.tensors();
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    GradCheckEntry entry;
    entry.tensor = params[ti].name;
    for (Index j = 0; j < params[ti].size(); ++j) {
      const double orig = params[ti].data[j];
      params[ti].data[j] = orig + opt.epsilon;
      const double fp =
          gradcheck_objective(model, words, labels, opt.l2_reg, opt.reg_window);
      params[ti].data[j] = orig - opt.epsilon;
      const double fm =
          gradcheck_objective(model, words, labels, opt.l2_reg, opt.reg_window);
      params[ti].data[j] = orig;
      const double numeric = (fp - fm) / (2.0 * opt.epsilon);
      const double ana = analytic[ti].data[j];
      const double rel = std::abs(ana - numeric) /
                         std::max(1e-4, std::abs(ana) + std::abs(numeric));
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = j;
        entry.analytic = ana;
        entry.numeric = numeric;
      }
    }
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace slotfill

#endif  // SLOTFILL_GRADCHECK_HPP
