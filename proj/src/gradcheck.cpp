#include "narrownet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "narrownet/dataset.hpp"
#include "narrownet/objective.hpp"

namespace narrownet {

double gradcheck_error(double analytic, double numeric) {
  const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

namespace {

double fd_step(double value) { return 1e-6 * (1.0 + std::abs(value)); }

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  GradcheckReport report;
  report.worst.rel_error = -1.0;
  std::uint64_t stream = 0;
  for (Head head : options.heads) {
    for (ActivationKind kind : options.activations) {
      Activation act{kind, options.corrupt_derivative};
      const Activation exact{kind};
      GradcheckEntry case_worst;
      case_worst.rel_error = -1.0;
      auto consider = [&](GradcheckEntry e) {
        ++report.compared;
        if (e.rel_error > case_worst.rel_error) case_worst = e;
      };

      for (std::size_t inst = 0; inst < options.instances; ++inst, ++stream) {
        const Seed seed = derive_seed(options.seed, stream);
        const Dataset data = make_synthetic(options.n, options.d, derive_seed(seed, 0));
        Params p = lecun_init(options.d, options.m, head, derive_seed(seed, 1));
        // Spread pre-activations over the curved part of every activation.
        for (double& w : p.mutable_w().data()) w *= 3.0;

        const Gradients g = grad(p, act, data);
        for (std::size_t k = 0; k < p.d(); ++k) {
          for (std::size_t j = 0; j < p.m(); ++j) {
            Params plus = p;
            Params minus = p;
            const double h = fd_step(p.w()(k, j));
            plus.mutable_w()(k, j) += h;
            minus.mutable_w()(k, j) -= h;
            const double numeric = (loss(plus, exact, data) - loss(minus, exact, data)) / (2.0 * h);
            consider({head, kind, inst, "grad_w", k, j, g.grad_w(k, j), numeric,
                      gradcheck_error(g.grad_w(k, j), numeric)});
          }
        }
        for (std::size_t j = 0; j < p.v().size(); ++j) {
          Params plus = p;
          Params minus = p;
          const double h = fd_step(p.v()[j]);
          plus.mutable_v()[j] += h;
          minus.mutable_v()[j] -= h;
          const double numeric = (loss(plus, exact, data) - loss(minus, exact, data)) / (2.0 * h);
          consider({head, kind, inst, "grad_v", 0, j, g.grad_v[j], numeric,
                    gradcheck_error(g.grad_v[j], numeric)});
        }

        const DenseMatrix jac = jacobian_w(p, act, data.x);
        for (std::size_t k = 0; k < p.d(); ++k) {
          for (std::size_t j = 0; j < p.m(); ++j) {
            Params plus = p;
            Params minus = p;
            const double h = fd_step(p.w()(k, j));
            plus.mutable_w()(k, j) += h;
            minus.mutable_w()(k, j) -= h;
            const DenseVector fp = forward(plus, exact, data.x);
            const DenseVector fm = forward(minus, exact, data.x);
            for (std::size_t i = 0; i < data.n(); ++i) {
              const double numeric = (fp[i] - fm[i]) / (2.0 * h);
              const double analytic = jac(i, j * p.d() + k);
              consider({head, kind, inst, "jacobian_w", i, j * p.d() + k, analytic, numeric,
                        gradcheck_error(analytic, numeric)});
            }
          }
        }
      }
      report.per_case.push_back(case_worst);
      if (case_worst.rel_error > report.worst.rel_error) report.worst = case_worst;
    }
  }
  report.pass = report.compared > 0 && report.worst.rel_error <= options.tolerance;
  return report;
}

}  // namespace narrownet
