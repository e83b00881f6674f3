#include "dirkde/errors.hpp"
#include "dirkde/models.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

namespace dirkde {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd sigma1(int p)
{
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(p);
  const double head[3] = {0.5, 0.25, 0.125};
  for (int i = 0; i < std::min(p, 3); ++i)
    diag(i) = head[i];
  return diag.asDiagonal();
}

Eigen::MatrixXd sigma2(int p)
{
  Eigen::VectorXd diag = sigma1(p).diagonal().reverse();
  return diag.asDiagonal();
}

std::vector<double> coords(const UnitVector& v)
{
  return {v.coords().begin(), v.coords().end()};
}

// (1/2, sqrt(3)/2, 0_{q-1})
UnitVector sixty_degrees(int q)
{
  return pad_back(UnitVector({0.5, std::sqrt(3.0) / 2.0}), q - 1);
}

// Spherical points placed in the first three coordinates for q > 1.
UnitVector sph(int q, double theta, double phi)
{
  return pad_back(rho2(theta, phi), q - 2);
}

DensityModel vm_mix(std::vector<double> w,
                    std::vector<UnitVector> mu,
                    std::vector<double> k)
{
  return DensityModel::vm_mixture(
    VonMisesMixture(std::move(w), std::move(mu), std::move(k)));
}

DensityModel m9(int q)
{
  const int index[7] = {1, 2, 3, 4, 6, 8, 9};
  std::vector<double> w(8, 1.0 / 8.0);
  std::vector<UnitVector> mu{basis_vector(q, q)};
  std::vector<double> k{std::pow(5.0 / 3.0, 8)};
  for (int pos = 0; pos < 7; ++pos) {
    int i = index[pos];
    if (q == 1)
      mu.push_back(rho1(i * kPi / 20.0));
    else
      mu.push_back(pad_front(q - 2, rho2(0.0, (10 - i) * kPi / 20.0)));
    k.push_back(std::pow(5.0 / 3.0, pos + 1));
  }
  return vm_mix(std::move(w), std::move(mu), std::move(k));
}

DensityModel m11(int q)
{
  std::vector<double> w{0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1};
  std::vector<double> k{20, 10, 10, 5, 1, 5, 1};
  std::vector<UnitVector> mu;
  if (q == 1) {
    mu = {rho1(0.0), rho1(-kPi / 6), rho1(kPi / 6)};
    for (int i : {-1, 1}) {
      mu.push_back(rho1(i * kPi / 4));
      mu.push_back(rho1(i * kPi / 2));
    }
  } else {
    mu = {sph(q, 0.0, kPi / 2), sph(q, -kPi / 6, 3 * kPi / 8),
          sph(q, kPi / 6, 5 * kPi / 8)};
    for (int i : {-1, 1}) {
      mu.push_back(sph(q, i * kPi / 4, i * kPi / 3));
      mu.push_back(sph(q, i * kPi / 2, i * kPi / 3));
    }
  }
  return vm_mix(std::move(w), std::move(mu), std::move(k));
}

DensityModel m14(int q)
{
  return vm_mix({1.0 / 3, 1.0 / 3, 1.0 / 3},
                {basis_vector(q, q), pad_front(q - 1, rho1(5 * kPi / 4)),
                 pad_front(q - 1, rho1(7 * kPi / 4))},
                {10, 10, 10});
}

DensityModel m17(int q)
{
  std::vector<double> w(10, 0.1);
  std::vector<UnitVector> mu;
  std::vector<double> k;
  for (int i = 0; i < 10; ++i) {
    double theta = 3 * kPi * i / 18;
    mu.push_back(q == 1 ? rho1(theta) : sph(q, theta, 3 * kPi * i / 36));
    k.push_back(std::pow(1.5, 10 - i));
  }
  return vm_mix(std::move(w), std::move(mu), std::move(k));
}

DensityModel m18(int q)
{
  std::vector<UnitVector> mu;
  for (int i = 0; i < 2; ++i) {
    mu.push_back(pad_front(q - 1, rho1((2 * i + 1) * kPi / 4)));
    mu.push_back(pad_front(q - 1, rho1((i + 2) * kPi / 5)));
  }
  return vm_mix(std::vector<double>(4, 0.25), std::move(mu), std::vector<double>(4, 50.0));
}

DensityModel m19(int q)
{
  std::vector<UnitVector> mu;
  std::vector<double> k;
  for (int i = 0; i < 10; ++i) {
    double phi = 3 * kPi * i / 36;
    if (q == 1) {
      mu.push_back(rho1(phi));
      mu.push_back(rho1(-phi));
    } else {
      double theta = 3 * kPi * i / 18;
      mu.push_back(sph(q, theta, phi));
      mu.push_back(sph(q, theta, -phi));
    }
    k.push_back(std::pow(1.5, 10 - i));
    k.push_back(10.0);
  }
  return vm_mix(std::vector<double>(20, 0.05), std::move(mu), std::move(k));
}

DensityModel m20(int q)
{
  std::vector<double> w{2.0 / 11};
  std::vector<UnitVector> mu{basis_vector(q, q)};
  std::vector<double> k{20.0};
  for (int i = 1; i <= 3; ++i) {
    if (q == 1) {
      w.push_back(3.0 / 11);
      mu.push_back(rho1(2 * i * kPi / 3));
      k.push_back(15.0);
      continue;
    }
    for (int j : {3, 5, 6}) {
      w.push_back(1.0 / 11);
      mu.push_back(sph(q, 2 * i * kPi / 3, kPi / j));
      k.push_back(15.0);
    }
  }
  return vm_mix(std::move(w), std::move(mu), std::move(k));
}

} // namespace

const std::vector<ScenarioInfo>& scenario_catalog()
{
  static const std::vector<ScenarioInfo> catalog = {
    {1, "M1", "Uniform: 1/omega_q"},
    {2, "M2", "von Mises: vM((0_q,1), 2)"},
    {3, "M3", "Projected normal, rotationally symmetric: PN((0_q,1), I/2)"},
    {4, "M4", "Projected normal, not rotationally symmetric: PN((1,0_q), 2*Sigma1)"},
    {5, "M5", "Directional Cauchy: DC((0_q,1), 10)"},
    {6, "M6", "Skew normal directional: SND((0_q,1), 1/2, 1/2, 5)"},
    {7, "M7", "Watson: W((1,0_q), 2)"},
    {8, "M8", "Two vM at 90 degrees: vM((0_q,1),3)/2 + vM((1,0_q),3)/2"},
    {9, "M9", "Skewed mixture of 8 vM with concentrations (5/3)^k"},
    {10, "M10", "Two projected normals: PN((1,0_q),Sigma1)/2 + PN((s,s,0),Sigma2)/2"},
    {11, "M11", "Bandage: 7 vM with concentrations 20, 10, 5, 1"},
    {12, "M12", "Projected normal and Cauchy: 3/4 PN((1,0_q),Sigma1) + 1/4 DC(60deg, 50)"},
    {13, "M13", "Uniform and Cauchy: 4/5 uniform + 1/5 DC(60deg, 100)"},
    {14, "M14", "Trimodal: 3 vM with concentration 10"},
    {15, "M15", "Small circle: SC((0_q,1), tau=10, nu=0)"},
    {16, "M16", "Double small circle: SC((0_q,1),10,0)/2 + SC((1,0_q),10,0)/2"},
    {17, "M17", "Spiral: 10 vM with concentrations 1.5^(10-i)"},
    {18, "M18", "Claw: 4 vM with concentration 50"},
    {19, "M19", "Double spiral: 20 vM"},
    {20, "M20", "Windmill: central vM(20) plus arms vM(15)"},
  };
  return catalog;
}

int parse_scenario_id(const std::string& name)
{
  std::string s = name;
  if (!s.empty() && (s[0] == 'M' || s[0] == 'm'))
    s = s.substr(1);
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c);
      }))
    throw DomainError("unknown scenario '" + name + "'");
  int id = std::stoi(s);
  if (id < 1 || id > 20)
    throw DomainError("unknown scenario '" + name + "'");
  return id;
}

DensityModel scenario(int id, int q)
{
  if (q < 1)
    throw DomainError("scenario: q must be >= 1");
  const int p = q + 1;
  const UnitVector north = basis_vector(q, q);
  const UnitVector first = basis_vector(q, 0);
  switch (id) {
    case 1:
      return DensityModel::uniform(q);
    case 2:
      return DensityModel::von_mises(north, 2.0);
    case 3:
      return DensityModel::projected_normal(
        coords(north), 0.5 * Eigen::MatrixXd::Identity(p, p));
    case 4:
      return DensityModel::projected_normal(coords(first), 2.0 * sigma1(p));
    case 5:
      return DensityModel::directional_cauchy(north, 10.0);
    case 6:
      return DensityModel::skew_normal_directional(north, 0.5, 0.5, 5.0);
    case 7:
      return DensityModel::watson(first, 2.0);
    case 8:
      return vm_mix({0.5, 0.5}, {north, first}, {3.0, 3.0});
    case 9:
      return m9(q);
    case 10: {
      double s = std::sqrt(2.0) / 2.0;
      auto second = pad_back(UnitVector({s, s}), q - 1);
      return DensityModel::mixture(
        {0.5, 0.5},
        {DensityModel::projected_normal(coords(first), sigma1(p)),
         DensityModel::projected_normal(coords(second), sigma2(p))});
    }
    case 11:
      return m11(q);
    case 12:
      return DensityModel::mixture(
        {0.75, 0.25},
        {DensityModel::projected_normal(coords(first), sigma1(p)),
         DensityModel::directional_cauchy(sixty_degrees(q), 50.0)});
    case 13:
      return DensityModel::mixture(
        {0.8, 0.2},
        {DensityModel::uniform(q),
         DensityModel::directional_cauchy(sixty_degrees(q), 100.0)});
    case 14:
      return m14(q);
    case 15:
      return DensityModel::small_circle(north, 10.0, 0.0);
    case 16:
      return DensityModel::mixture({0.5, 0.5},
                                   {DensityModel::small_circle(north, 10.0, 0.0),
                                    DensityModel::small_circle(first, 10.0, 0.0)});
    case 17:
      return m17(q);
    case 18:
      return m18(q);
    case 19:
      return m19(q);
    case 20:
      return m20(q);
    default:
      throw DomainError("scenario id must be in 1..20");
  }
}

} // namespace dirkde
