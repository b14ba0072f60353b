#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fsi/femcore/dirichlet.hpp"
#include "fsi/fsisystem/system.hpp"

namespace fsi::analysis {

using femcore::CoupledSpace;
using femcore::MaterialParams;
using krylov::CsrMatrix;

enum class NormKind { V, V_Q, H1 };

std::string_view to_string(NormKind k);
NormKind parse_norm_kind(std::string_view s);

/// Blocks with homogeneous Dirichlet data on the free DOFs, the matching
/// H1 Gram matrix and the scaling r.
struct TheoryProblem {
  femcore::ReducedBlocks blocks;
  CsrMatrix h1;
  MaterialParams params;
  double r = 1.0;
};

TheoryProblem make_theory_problem(const CoupledSpace& space, const MaterialParams& params);
/// Saddle point system of the given variant with zero right-hand side.
fsisystem::BlockSystem theory_system(const TheoryProblem& problem, fsisystem::Variant variant);

struct InfSupReport {
  double beta = 0.0;
  NormKind norm = NormKind::V;
  double r = 1.0;
  int level = -1;
  MaterialParams params;
  /// Eigenvalues below 1e-10 * lambda_max, excluded from beta.
  Index zero_modes = 0;
  double lambda_max = 0.0;
  Index velocity_dofs = 0;
  Index pressure_dofs = 0;
};

/// beta^2 is the smallest nonzero eigenvalue of (B N^{-1} B') q = lambda r^{-1} Mp q
/// for the Gram matrix N. Throws if the pressure space exceeds
/// `max_pressure_dofs` or N is singular.
InfSupReport infsup_constant(const CsrMatrix& gram, const CsrMatrix& b, std::span<const double> mp, double r,
                             Index max_pressure_dofs = 4000);
/// N = A + rD (V), A + rD^Q (V_Q) or the H1 Gram (H1).
InfSupReport infsup_constant(const TheoryProblem& problem, NormKind norm, Index max_pressure_dofs = 4000);

/// Eigenvalue bounds for diagonal M1 on the stabilized system: unit
/// coercivity of A + rD in its own norm and ||b|| <= 1 give
///   negative eigenvalues in [(1 - sqrt 5)/2, (1 - sqrt(1 + 4 beta^2))/2],
///   positive eigenvalues in [1, (1 + sqrt 5)/2].
struct BrezziCheck {
  double beta = 0.0;
  double negative_lo = 0.0;
  double negative_hi = 0.0;
  double positive_lo = 0.0;
  double positive_hi = 0.0;
  /// Largest distance of an eigenvalue outside its interval (0 if inside).
  double worst_violation = 0.0;
  bool pass = false;
};

BrezziCheck brezzi_intervals(double beta);

struct SpectrumReport {
  /// Sorted by real part, then imaginary part.
  std::vector<std::complex<double>> eigenvalues;
  double condition = 0.0;  ///< max |lambda| / min |lambda|
  double max_imag = 0.0;
  krylov::PreconditionerKind kind = krylov::PreconditionerKind::M1;
  krylov::ApplicationMode mode = krylov::ApplicationMode::diagonal;
  double r = 1.0;
  MaterialParams params;
  std::optional<BrezziCheck> brezzi;
};

/// Dense eigenvalues of K P^{-1} with P^{-1} given by its action.
/// A symmetric K and symmetric positive definite P^{-1} use the symmetric
/// solver (real spectrum); anything else the general one.
SpectrumReport spectrum_of(const Eigen::MatrixXd& k, const krylov::LinearOperator& precond);

/// Spectrum of the preconditioned saddle operator. Diagonal M1 on the
/// stabilized system also gets the Brezzi interval check with beta from
/// the V norm.
SpectrumReport preconditioned_spectrum(const fsisystem::BlockSystem& system, krylov::PreconditionerKind kind,
                                       krylov::ApplicationMode mode, double brezzi_tolerance = 1e-6,
                                       Index max_size = 4000);

struct NormIdentityReport {
  double v_deviation = 0.0;   ///< u'(A + rD)u against ||u||_V^2
  double vq_deviation = 0.0;  ///< u'(A + rD^Q)u against a(u, u) + r ||P_Q div u||^2
  int samples = 0;
  double worst() const { return std::max(v_deviation, vq_deviation); }
};

/// Worst relative deviation over random coefficient vectors (uniform in
/// [-1, 1]) on the full velocity space, quadrature side from DenseOracle.
NormIdentityReport norm_identity_check(const CoupledSpace& space, const MaterialParams& params, double r,
                                       int sample_count, std::uint64_t seed = 1);

void write_infsup_csv(std::ostream& os, std::span<const InfSupReport> rows);
void write_spectrum_csv(std::ostream& os, std::span<const SpectrumReport> rows);

}  // namespace fsi::analysis
