#include "casimir/material.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "casimir/constants.hpp"
#include "casimir/csv.hpp"

namespace casimir {

namespace {
constexpr double kC = constants::speed_of_light;
}

MaterialResponse MaterialResponse::ideal_metal() {
  MaterialResponse m;
  m.kind_ = Kind::ideal_metal;
  return m;
}

MaterialResponse MaterialResponse::drude(double plasma_frequency_ev, double relaxation_rate_ev) {
  if (!(plasma_frequency_ev > 0.0) || !(relaxation_rate_ev >= 0.0))
    throw std::domain_error("material: drude requires omega_p > 0 and gamma >= 0");
  MaterialResponse m;
  m.kind_ = Kind::drude;
  m.plasma_rad_s_ = plasma_frequency_ev * constants::ev_to_rad_per_s;
  m.relaxation_rad_s_ = relaxation_rate_ev * constants::ev_to_rad_per_s;
  return m;
}

MaterialResponse MaterialResponse::gold() { return drude(9.0, 0.035); }

MaterialResponse MaterialResponse::tabulated(std::vector<double> xi_rad_per_s,
                                             std::vector<double> permittivity) {
  if (xi_rad_per_s.size() < 2 || xi_rad_per_s.size() != permittivity.size())
    throw std::invalid_argument("material: tabulated needs >= 2 matched (xi, eps) rows");
  for (std::size_t i = 0; i < xi_rad_per_s.size(); ++i) {
    if (!(xi_rad_per_s[i] > 0.0))
      throw std::invalid_argument("material: tabulated frequencies must be positive");
    if (i > 0 && !(xi_rad_per_s[i] > xi_rad_per_s[i - 1]))
      throw std::invalid_argument("material: tabulated frequencies must be strictly increasing");
    if (!(permittivity[i] >= 1.0))
      throw std::invalid_argument("material: permittivity on the imaginary axis must be >= 1");
  }
  MaterialResponse m;
  m.kind_ = Kind::tabulated;
  m.table_xi_min_ = xi_rad_per_s.front();
  m.table_xi_max_ = xi_rad_per_s.back();
  m.table_points_ = xi_rad_per_s.size();
  std::vector<double> log_xi(xi_rad_per_s.size());
  for (std::size_t i = 0; i < xi_rad_per_s.size(); ++i) log_xi[i] = std::log(xi_rad_per_s[i]);
  m.table_ = MonotoneCubic(std::move(log_xi), std::move(permittivity));
  return m;
}

MaterialResponse MaterialResponse::tabulated_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("material: cannot open permittivity table " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("material: empty permittivity table " + path);
  auto header = csv::split(line);
  if (header.size() != 2 || header[0] != "xi_rad_per_s" || header[1] != "eps")
    throw std::runtime_error("material: expected header 'xi_rad_per_s,eps' in " + path);
  std::vector<double> xi, eps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (fields.size() != 2)
      throw std::runtime_error("material: malformed row in " + path + ": " + line);
    xi.push_back(std::stod(fields[0]));
    eps.push_back(std::stod(fields[1]));
  }
  return tabulated(std::move(xi), std::move(eps));
}

double MaterialResponse::permittivity(double xi) const {
  if (!(xi > 0.0))
    throw std::domain_error(
        "material: permittivity requires xi > 0 (the n=0 mode uses dedicated "
        "zero-frequency reflection logic)");
  switch (kind_) {
    case Kind::ideal_metal:
      return std::numeric_limits<double>::infinity();
    case Kind::drude:
      return 1.0 + plasma_rad_s_ * plasma_rad_s_ / (xi * (xi + relaxation_rad_s_));
    case Kind::tabulated: {
      if (xi < table_xi_min_ || xi > table_xi_max_)
        throw std::out_of_range("material: xi = " + csv::format_g12(xi) +
                                " rad/s outside tabulated range [" +
                                csv::format_g12(table_xi_min_) + ", " +
                                csv::format_g12(table_xi_max_) + "]");
      return table_(std::log(xi));
    }
  }
  throw std::logic_error("material: unreachable kind");
}

double MaterialResponse::fresnel(double xi, double k_perp, Polarization pol) const {
  if (!(xi >= 0.0) || !(k_perp >= 0.0) || (xi == 0.0 && k_perp == 0.0))
    throw std::domain_error("material: fresnel requires xi >= 0, k_perp >= 0, not both zero");
  if (kind_ == Kind::ideal_metal) return pol == Polarization::te ? -1.0 : 1.0;
  if (xi == 0.0) {
    // ohmic metal at zero frequency: TM reflects fully, TE not at all
    return pol == Polarization::te ? 0.0 : 1.0;
  }
  const double eps = permittivity(xi);
  const double xc = xi / kC;
  const double q = std::sqrt(xc * xc + k_perp * k_perp);
  // k_z = sqrt(eps xi^2/c^2 + k_perp^2), written to stay accurate when
  // eps - 1 is small
  const double kz = std::sqrt(q * q + (eps - 1.0) * xc * xc);
  if (pol == Polarization::te) return (q - kz) / (q + kz);
  return (eps * q - kz) / (eps * q + kz);
}

std::string MaterialResponse::description() const {
  switch (kind_) {
    case Kind::ideal_metal:
      return "ideal-metal";
    case Kind::drude: {
      std::ostringstream os;
      os << "drude(omega_p=" << csv::format_g12(plasma_rad_s_ / constants::ev_to_rad_per_s)
         << "eV, gamma=" << csv::format_g12(relaxation_rad_s_ / constants::ev_to_rad_per_s)
         << "eV)";
      return os.str();
    }
    case Kind::tabulated: {
      std::ostringstream os;
      os << "tabulated(" << table_points_ << " points, xi in [" << csv::format_g12(table_xi_min_)
         << ", " << csv::format_g12(table_xi_max_) << "] rad/s)";
      return os.str();
    }
  }
  return "unknown";
}

ThermalEnvironment::ThermalEnvironment(double temperature_kelvin)
    : temperature_(temperature_kelvin) {
  if (!(temperature_kelvin > 0.0))
    throw std::domain_error("material: temperature must be positive");
}

double ThermalEnvironment::matsubara_frequency(long n) const {
  if (n < 0) throw std::domain_error("material: Matsubara index must be >= 0");
  return 2.0 * constants::pi * static_cast<double>(n) * constants::boltzmann * temperature_ /
         constants::hbar;
}

double ThermalEnvironment::thermal_length() const {
  return constants::hbar * constants::speed_of_light /
         (2.0 * constants::pi * constants::boltzmann * temperature_);
}

}  // namespace casimir
