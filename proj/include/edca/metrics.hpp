#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "edca/genome.hpp"

namespace edca {

/// K x K counts; entry (i, j) counts rows of true class i predicted as j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}
  ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted, std::size_t k);

  std::size_t classes() const { return k_; }
  std::size_t operator()(std::size_t i, std::size_t j) const { return counts_[i * k_ + j]; }
  std::size_t& operator()(std::size_t i, std::size_t j) { return counts_[i * k_ + j]; }
  std::size_t total() const;

 private:
  std::size_t k_;
  std::vector<std::size_t> counts_;
};

/// Multiclass Matthews correlation coefficient; 0 when undefined.
double mcc(const ConfusionMatrix& cm);
double mcc(std::span<const int> truth, std::span<const int> predicted, std::size_t k);

double accuracy(const ConfusionMatrix& cm);

/// Maps MCC in [-1, 1] to fitness in [0, 1], zero best. Throws ConfigError
/// outside the domain.
double fitness_from_mcc(double mcc_value);

struct UsageReport {
  double pct_instances = 1.0;
  double pct_features = 1.0;
  double pct_data = 1.0;
};

UsageReport data_usage(const Genome& genome, std::size_t max_instances, std::size_t max_features);

enum class DrMode { None, IsOnly, FsOnly, IsFs };

inline constexpr std::array<DrMode, 4> kAllDrModes{DrMode::None, DrMode::IsOnly, DrMode::FsOnly, DrMode::IsFs};

DrMode dr_mode(const Genome& genome);
std::string to_string(DrMode mode);

/// Counts per mode, indexed in kAllDrModes order.
std::array<std::size_t, 4> dr_histogram(std::span<const DrMode> modes);

}  // namespace edca
