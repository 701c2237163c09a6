#pragma once

#include <array>

#include "obsel/model.hpp"
#include "obsel/selection.hpp"

namespace obsel {

/// Lumped-parameter surrogate of a post-combustion CO2 capture loop:
/// a staged absorber and desorber exchanging four species (N2, CO2, MEA,
/// H2O) between a falling liquid and a rising gas, a cross heat exchanger
/// between the rich and lean solvent lines, and a heated reboiler that
/// closes the solvent loop. All interphase transfer, equilibrium and
/// evaporation closures are deliberately constant-coefficient stand-ins;
/// the model reproduces the coupling structure of such plants, not their
/// quantitative behaviour.
///
/// Differential states per column, stage-major within each group and stages
/// counted from the column bottom:
///   liquid concentrations (4 species), liquid temperature,
///   gas concentrations (4 species), gas temperature.
/// The absorber block comes first, then the desorber, then the heat
/// exchanger tube and shell temperatures and the reboiler temperature, so
/// n = 20 * stages + 3.
///
/// Seven algebraic variables, all functions of the reboiler temperature and
/// the inputs: four reboiler liquid mole fractions, the vapour fraction, the
/// lean CO2 concentration returned to the absorber, and the vapour flow fed
/// to the desorber.
///
/// Inputs: u = [solvent flow (L/s), reboiler heat (KJ/s), flue gas flow (m3/s)].
struct SurrogateParams {
  int stages = 5;
  int substeps = 8;  ///< RK4 substeps per sample interval
  double sample_interval_minutes = 2.0;

  // Holdup volumes (m3)
  double liquid_stage_volume = 0.2;
  double gas_stage_volume = 60.0;
  double hx_tube_volume = 0.05;
  double hx_shell_volume = 0.05;
  double reboiler_volume = 0.03;

  // Heat capacities
  std::array<double, 4> cp_liquid{29.0, 37.0, 160.0, 75.0};  // J/mol/K
  std::array<double, 4> cp_gas{29.0, 37.0, 80.0, 34.0};      // J/mol/K
  double cp_volumetric = 3.9e6;                               // J/m3/K solvent

  // Interphase transfer closures (per column direction)
  std::array<double, 4> k_absorber{2e-4, 8e-3, 5e-4, 1.5e-3};   // 1/s
  std::array<double, 4> eq_absorber{120.0, 5.2e-3, 4e-4, 5e-5};
  std::array<double, 4> k_desorber{2e-4, 6e-3, 5e-4, 1.5e-3};   // 1/s
  std::array<double, 4> eq_desorber{140.0, 5.5e-3, 4e-4, 8e-5};
  double temp_sensitivity = 0.02;   // 1/K, equilibrium activity slope
  double heat_transfer = 25.0;      // W/m3/K gas-liquid
  /// Heat released into the liquid per mole transferred, by species.
  std::array<double, 4> transfer_heat{1.2e4, 8.0e4, 4.0e4, 4.4e4};  // J/mol
  /// CO2 equilibrium activity response to solvent composition, relative to
  /// the lean make-up concentrations.
  double mea_activity = 2e-4;   // 1/(mol/m3) free-amine effect
  double h2o_activity = -5e-5;  // 1/(mol/m3) dilution effect

  // Feeds
  std::array<double, 4> flue_conc{28.5, 5.7, 0.01, 3.0};  // mol/m3
  double flue_temp = 313.0;                                // K
  double lean_conc_n2 = 0.2;
  double lean_conc_mea = 4900.0;
  double lean_conc_h2o = 39000.0;
  double lean_co2_base = 1100.0;   // mol/m3 at the reference temperature
  double lean_co2_slope = 0.04;    // 1/K decay of the lean CO2 level

  // Reboiler flash closures
  double ref_temp = 313.0;
  std::array<double, 4> frac_weight{0.001, 0.03, 0.11, 0.859};
  double frac_co2_slope = 0.04;    // 1/K decay of the CO2 weight
  double vap_temp = 313.5;         // K, vapour fraction midpoint
  double vap_width = 1.5;          // K, vapour fraction spread
  double vap_flow_gain = 0.30;     // m3/s at full vapour fraction
  double vap_flow_min = 0.05;      // m3/s floor
  std::array<double, 4> volatility{10.0, 8.0, 0.05, 1.2};
  double vap_conc_total = 38.0;    // mol/m3
  double evap_energy = 100.0;      // W drained at full vapour fraction
  double hx_ua = 2000.0;           // W/K
  double trim_cool_ua = 1500.0;    // W/K, lean trim cooler on the shell side
  double trim_cool_temp = 313.0;   // K, cooling water temperature

  /// Cuts the cross-unit couplings: constant liquid and vapour inlets and a
  /// constant desorber gas flow. With zero transfer coefficients the column
  /// concentration states then follow pure advection chains. Test hook.
  bool isolated_columns = false;
  std::array<double, 4> iso_liquid_conc{0.2, 1100.0, 4900.0, 39000.0};
  double iso_liquid_temp = 313.0;
  std::array<double, 4> iso_vapor_conc{1.0, 30.0, 0.05, 7.0};

  bool operator==(const SurrogateParams&) const = default;

  void validate() const;
  int state_dim() const { return 20 * stages + 3; }
};

/// State indexing helpers (0-based), stages counted from the bottom.
struct SurrogateLayout {
  int s;
  explicit SurrogateLayout(int stages) : s(stages) {}
  int liq_conc(int column, int species, int stage) const {
    return column * 10 * s + species * s + stage;
  }
  int liq_temp(int column, int stage) const { return column * 10 * s + 4 * s + stage; }
  int gas_conc(int column, int species, int stage) const {
    return column * 10 * s + (5 + species) * s + stage;
  }
  int gas_temp(int column, int stage) const { return column * 10 * s + 9 * s + stage; }
  int hx_tube() const { return 20 * s; }
  int hx_shell() const { return 20 * s + 1; }
  int reboiler() const { return 20 * s + 2; }
};

/// Builds the surrogate. The operating point x_ref is the loop steady state
/// under u_ref = [0.5812, 0.1357, 1.0]; for the default parameter set it is
/// a frozen constant, otherwise it is solved on construction.
SystemModel surrogate_ccp(const SurrogateParams& params = SurrogateParams());

/// The candidate instrumentation for the surrogate: gas CO2 concentration
/// sensors on every stage of both columns, gas temperature sensors on every
/// stage of both columns, and temperature sensors on the heat exchanger tube
/// and shell and on the reboiler. 4 * stages + 3 sensors.
SensorCatalog surrogate_catalog(const SurrogateParams& params = SurrogateParams(),
                                double conc_cost = 20.0, double temp_cost = 1.0);

/// The constant input vector the operating point is anchored to.
VectorXd surrogate_nominal_input();

}  // namespace obsel
