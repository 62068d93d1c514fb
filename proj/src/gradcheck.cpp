#include "pantry/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "pantry/ops.hpp"

namespace pantry {

std::string GradCheckReport::to_string() const {
  std::ostringstream os;
  for (const auto& e : entries) {
    os << (e.pass ? "pass " : "FAIL ") << e.name << " max_rel_error=" << e.max_rel_error << "\n";
  }
  os << (pass ? "all gradients within " : "gradient mismatch beyond ") << tolerance;
  return os.str();
}

GradCheckReport compare_with_central_differences(
    const std::function<TensorT<double>()>& f,
    std::vector<std::pair<std::string, TensorT<double>>> params,
    const std::vector<std::vector<double>>& analytic, double step, double tolerance) {
  if (step <= 0) throw ArgumentError("gradient_check: step must be positive");

  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;
  report.pass = true;

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& [name, param] = params[pi];
    const auto& grad = analytic.at(pi);
    if (grad.size() != param.numel()) {
      throw ArgumentError("gradient_check: analytic gradient size mismatch for " + name);
    }
    GradCheckEntry entry;
    entry.name = name;
    for (std::size_t i = 0; i < param.numel(); ++i) {
      const double saved = param.data()[i];
      param.data()[i] = saved + step;
      const double up = f().item();
      param.data()[i] = saved - step;
      const double down = f().item();
      param.data()[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grad[i];
      const double rel =
          std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      entry.max_rel_error = std::max(entry.max_rel_error, rel);
    }
    entry.pass = entry.max_rel_error <= tolerance;
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

GradCheckReport gradient_check(const std::function<TensorT<double>()>& f,
                               std::vector<std::pair<std::string, TensorT<double>>> params,
                               double step, double tolerance) {
  for (auto& [name, param] : params) param.set_requires_grad(true);

  TapeT<double> tape;
  std::vector<std::vector<double>> analytic;
  {
    TapeT<double>::Scope scope(tape);
    auto loss = f();
    if (loss.numel() != 1) {
      throw ArgumentError("gradient_check: f must return a scalar, got " +
                          shape_str(loss.shape()));
    }
    for (auto& [name, param] : params) param.zero_grad();
    ops::backward(loss);
  }
  for (auto& [name, param] : params) {
    if (param.has_grad()) {
      analytic.emplace_back(param.grad(), param.grad() + param.numel());
    } else {
      analytic.emplace_back(param.numel(), 0.0);
    }
  }

  return compare_with_central_differences(f, params, analytic, step, tolerance);
}

}  // namespace pantry
