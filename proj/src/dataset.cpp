#include "narrownet/dataset.hpp"

#include <ostream>

#include "narrownet/error.hpp"
#include "narrownet/format.hpp"

namespace narrownet {

Dataset make_synthetic(std::size_t n, std::size_t d, Seed seed) {
  if (n == 0 || d == 0) {
    throw PreconditionError("make_synthetic: needs n >= 1 and d >= 1");
  }
  Rng rng(seed);
  Dataset data;
  data.x = DenseMatrix(n, d);
  data.y = DenseVector(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = data.x.row(i);
    double norm = 0.0;
    // A Gaussian row is zero with probability zero; redraw anyway.
    while (norm == 0.0) {
      for (double& v : row) v = rng.normal();
      norm = norm2(row);
    }
    double sum = 0.0;
    for (double& v : row) {
      v /= norm;
      sum += v;
    }
    data.y[i] = sum * sum;
  }
  data.provenance = "synthetic(n=" + std::to_string(n) + ",d=" + std::to_string(d) +
                    ",seed=" + std::to_string(seed.value) + ")";
  return data;
}

Dataset with_targets(const Dataset& data, DenseVector y) {
  if (y.size() != data.n()) {
    throw DimensionError("with_targets: " + std::to_string(y.size()) + " targets for " +
                         std::to_string(data.n()) + " samples");
  }
  Dataset out{data.x, std::move(y), data.provenance + "+targets"};
  return out;
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  for (std::size_t k = 0; k < data.d(); ++k) out << 'x' << k << ',';
  out << "y\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (double v : data.x.row(i)) out << format_double(v) << ',';
    out << format_double(data.y[i]) << '\n';
  }
}

}  // namespace narrownet
