#include "mcomp/sampling.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mcomp/rng.hpp"

namespace mcomp {

namespace {

void check_prob(const Matrix& prob) {
  for (Index i = 0; i < prob.rows(); ++i)
    for (Index l = 0; l < prob.cols(); ++l)
      if (!(prob(i, l) > 0.0 && prob(i, l) <= 1.0))
        throw std::invalid_argument("draw_mask: probabilities must lie in (0, 1]");
}

}  // namespace

SampleMask draw_mask(Index n, double prob, std::uint64_t seed) {
  return draw_mask(n, Matrix::Constant(n, n, prob), seed);
}

SampleMask draw_mask(Index n, const Matrix& prob, std::uint64_t seed) {
  if (n < 1 || prob.rows() != n || prob.cols() != n)
    throw std::invalid_argument("draw_mask: probability matrix must be n x n");
  check_prob(prob);
  SampleMask mask;
  mask.n = n;
  mask.prob = prob;
  mask.seed = seed;
  mask.eps.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index l = 0; l < n; ++l) {
      const std::uint64_t bits =
          splitmix64(hash_combine(seed, static_cast<std::uint64_t>(i * n + l)));
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      mask.eps(i, l) = u < prob(i, l) ? 1 : 0;
    }
  }
  return mask;
}

Matrix apply_r_omega(const Matrix& z, const SampleMask& mask) {
  if (z.rows() != mask.n || z.cols() != mask.n)
    throw std::invalid_argument("apply_r_omega: dimension mismatch");
  return (mask.eps.cast<double>().array() * z.array() / mask.prob.array()).matrix();
}

Matrix apply_p_omega(const Matrix& z, const SampleMask& mask) {
  if (z.rows() != mask.n || z.cols() != mask.n)
    throw std::invalid_argument("apply_p_omega: dimension mismatch");
  return (mask.eps.cast<double>().array() * z.array()).matrix();
}

AdjointReport self_adjointness_check(const SampleMask& mask, int pairs,
                                     std::uint64_t check_seed) {
  Rng rng(check_seed);
  AdjointReport rep;
  for (int k = 0; k < pairs; ++k) {
    const Matrix a = gaussian_matrix(mask.n, mask.n, rng);
    const Matrix b = gaussian_matrix(mask.n, mask.n, rng);
    const double lhs = (a.array() * apply_r_omega(b, mask).array()).sum();
    const double rhs = (apply_r_omega(a, mask).array() * b.array()).sum();
    const double scale = std::max(1.0, std::max(std::abs(lhs), std::abs(rhs)));
    rep.max_asymmetry = std::max(rep.max_asymmetry, std::abs(lhs - rhs) / scale);
  }
  rep.symmetric = rep.max_asymmetry <= 1e-10;
  return rep;
}

void save_mask_csv(const SampleMask& mask, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_mask_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "# n=" << mask.n << " seed=" << mask.seed << "\n";
  out << "i,l,p\n";
  for (Index i = 0; i < mask.n; ++i)
    for (Index l = 0; l < mask.n; ++l)
      if (mask.eps(i, l)) {
        out << i << "," << l << "," << mask.prob(i, l) << "\n";
        if (!out) throw std::runtime_error("save_mask_csv: write failed for " + path);
      }
}

SampleMask load_mask_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_mask_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# n=", 0) != 0)
    throw std::runtime_error("load_mask_csv: bad header in " + path);
  SampleMask mask;
  {
    std::istringstream hdr(line.substr(4));
    std::string seed_tok;
    hdr >> mask.n >> seed_tok;
    if (mask.n < 1 || seed_tok.rfind("seed=", 0) != 0)
      throw std::runtime_error("load_mask_csv: bad header in " + path);
    mask.seed = std::stoull(seed_tok.substr(5));
  }
  std::getline(in, line);  // column header
  mask.eps = Eigen::MatrixXi::Zero(mask.n, mask.n);
  mask.prob = Matrix::Ones(mask.n, mask.n);  // unobserved entries default to 1
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    Index i, l;
    char c1, c2;
    double p;
    if (!(row >> i >> c1 >> l >> c2 >> p) || c1 != ',' || c2 != ',')
      throw std::runtime_error("load_mask_csv: bad row in " + path);
    if (i < 0 || i >= mask.n || l < 0 || l >= mask.n)
      throw std::runtime_error("load_mask_csv: index out of range in " + path);
    mask.eps(i, l) = 1;
    mask.prob(i, l) = p;
  }
  return mask;
}

}  // namespace mcomp
