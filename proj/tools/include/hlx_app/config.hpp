#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <hlx/cost.hpp>
#include <hlx/gridfn.hpp>
#include <hlx/levykernel.hpp>
#include <hlx/scheme.hpp>

namespace hlx::app {

/// Invalid or missing configuration entry; `field` is the dotted JSON path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class OrderChoice { I, J, Both };

struct Numerics {
  double tol_constant = 4.0;
  std::size_t mc_paths = 100'000;
  int mc_points = 5;
  bool fast_path = true;
  ConvolutionPath convolution = ConvolutionPath::Auto;
  std::size_t ot_map_budget = 5'000'000;
  std::size_t ot_transport_budget = 200'000;
  int ot_points = 3;
};

struct RunConfig {
  std::optional<GridDomain> domain;
  CostFunction cost = CostFunction::quadratic(0.5);
  KernelModel kernel = KernelModel::dirac(1);
  std::string datum = "cos";
  std::filesystem::path datum_path;
  double t = 1.0;
  std::vector<int> n_list;
  OrderChoice order = OrderChoice::Both;
  std::optional<double> eps;
  std::uint64_t seed = 0;
  std::filesystem::path output = "out";
  Numerics numerics;

  SchemeConfig scheme(int n, Order order) const;
};

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Names accepted in the datum block besides "csv".
const std::vector<std::string>& datum_catalog();
/// Catalog formula by name; throws ConfigError("datum.name") for unknown names.
ScalarField catalog_formula(const std::string& name, int dim);
/// The initial datum sampled on the configured domain (or read from CSV).
GridFunction build_datum(const RunConfig& cfg);

}  // namespace hlx::app
