#include <algorithm>
#include <string>

#include "elaxp/ela.hpp"
#include "elaxp/errors.hpp"
#include "elaxp/rng.hpp"

namespace elaxp {

FeatureVector compute_features(const ProblemInstance& problem, const SampleSet& sample,
                               std::span<const FeatureGroup> groups, std::uint64_t seed) {
  if (!sample.evaluated()) throw InvalidArgument("compute_features needs an evaluated sample");
  const auto& x = sample.points;
  const auto& y = sample.values;
  const Objective f = [&problem](const Eigen::VectorXd& p) { return problem.evaluate(p); };

  FeatureVector out;
  for (std::size_t gi = 0; gi < std::size(kAllGroups); ++gi) {
    const FeatureGroup g = kAllGroups[gi];
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) continue;
    const std::uint64_t s = derive_seed(seed, {gi});
    switch (g) {
      case FeatureGroup::cm_angle: out.append(ela::cm_angle(x, y, sample.bounds)); break;
      case FeatureGroup::cm_grad: out.append(ela::cm_grad(x, y, sample.bounds)); break;
      case FeatureGroup::disp: out.append(ela::disp(x, y)); break;
      case FeatureGroup::ela_conv: out.append(ela::conv(f, x, y, s)); break;
      case FeatureGroup::ela_curv: out.append(ela::curv(f, x, s)); break;
      case FeatureGroup::ela_distr: out.append(ela::distr(y)); break;
      case FeatureGroup::ela_level: out.append(ela::level(x, y, s)); break;
      case FeatureGroup::ela_meta: out.append(ela::meta(x, y)); break;
      case FeatureGroup::ic: out.append(ela::ic(x, y, s)); break;
      case FeatureGroup::nbc: out.append(ela::nbc(x, y)); break;
    }
  }
  return out;
}

}  // namespace elaxp
