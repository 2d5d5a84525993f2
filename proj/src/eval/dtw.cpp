#include "amphim/eval/dtw.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "amphim/io/csv.hpp"

namespace amphim::eval {

DtwResult dtw(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() == 0 || b.cols() == 0) throw std::invalid_argument("dtw: empty sequence");
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("dtw: frame dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                                std::to_string(b.rows()) + ")");
  }
  const Eigen::Index n = a.cols(), m = b.cols();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Constant(n + 1, m + 1, inf);
  acc(0, 0) = 0.0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    for (Eigen::Index j = 1; j <= m; ++j) {
      const double cost = (a.col(i - 1) - b.col(j - 1)).norm();
      acc(i, j) = cost + std::min({acc(i - 1, j - 1), acc(i - 1, j), acc(i, j - 1)});
    }
  }
  DtwResult out;
  out.distance = acc(n, m);
  Eigen::Index i = n, j = m;
  while (i > 0 && j > 0) {
    out.path.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1));
    const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(out.path.begin(), out.path.end());
  return out;
}

void write_dtw_csv(const std::vector<DtwRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "label,nominal_speed,episode,frames,dtw\n";
  for (const auto& r : records) {
    out << r.label << ',' << io::format_double(r.nominal_speed) << ',' << r.episode << ',' << r.frames << ','
        << io::format_double(r.distance) << '\n';
  }
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace amphim::eval
