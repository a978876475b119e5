#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "freelab/equilibrium.hpp"
#include "freelab/measures.hpp"
#include "freelab/potentials.hpp"

namespace freelab {

enum class InequalityKind {
  free_talagrand,
  ssfti,
  ssfti_general,
  inverse_free_lsi,
  free_santalo,
  free_santalo_shifted,
  inverse_santalo,
  free_brunn_minkowski,
  free_log_prekopa,
  inverse_ssfti,
};

inline constexpr InequalityKind kAllInequalityKinds[] = {
    InequalityKind::free_talagrand,       InequalityKind::ssfti,
    InequalityKind::ssfti_general,        InequalityKind::inverse_free_lsi,
    InequalityKind::free_santalo,         InequalityKind::free_santalo_shifted,
    InequalityKind::inverse_santalo,      InequalityKind::free_brunn_minkowski,
    InequalityKind::free_log_prekopa,     InequalityKind::inverse_ssfti,
};

// Upper-case name, e.g. "FREE_TALAGRAND".
std::string_view kind_name(InequalityKind kind);
// Accepts either case.
InequalityKind parse_kind(std::string_view name);

// Whether the inequality reads lhs <= rhs (otherwise lhs >= rhs).
bool is_upper_bound(InequalityKind kind);

// Which inputs a kind reads:
//   FREE_TALAGRAND mu;  SSFTI, SSFTI_GENERAL mu, nu;  INVERSE_FREE_LSI f;
//   FREE_SANTALO, FREE_SANTALO_SHIFTED f, g;  INVERSE_SANTALO, INVERSE_SSFTI f;
//   FREE_BRUNN_MINKOWSKI f = U1, g = U2, h = U3, theta;  FREE_LOG_PREKOPA f = U1, g = U2.
struct InequalityInputs {
  std::optional<GridMeasure> mu;
  std::optional<GridMeasure> nu;
  std::optional<Potential> f;
  std::optional<Potential> g;
  std::optional<Potential> h;
  double theta = 0.5;
  // Descriptor strings copied into the report, keyed by input name.
  std::map<std::string, std::string> descriptors;
};

struct InequalityReport {
  InequalityKind kind = InequalityKind::free_talagrand;
  double lhs = 0.0;
  double rhs = 0.0;
  // rhs - lhs for upper bounds, lhs - rhs otherwise; -inf for sentinel reports.
  double deficit = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  // Set when an entropy or Jacobian term is infinite; such reports never pass.
  bool sentinel = false;
  std::map<std::string, std::string> inputs;
  int resolution = 0;
  long long runtime_ms = 0;
};

inline constexpr int kHypothesisLattice = 256;
inline constexpr double kCenteringTolerance = 1e-8;

InequalityReport verify(InequalityKind kind, const InequalityInputs& inputs, double tolerance,
                        const SolverSettings& cfg = {});

// Checks f(x) + g(y) >= xy on the [-half_width, half_width]^2 lattice; throws
// PreconditionError naming the worst lattice point.
void check_fenchel_young_lattice(const Potential& f, const Potential& g, double half_width);

}  // namespace freelab
