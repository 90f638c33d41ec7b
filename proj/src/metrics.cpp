#include "edca/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "edca/errors.hpp"

namespace edca {

ConfusionMatrix::ConfusionMatrix(std::span<const int> truth, std::span<const int> predicted, std::size_t k)
    : ConfusionMatrix(k) {
  if (truth.size() != predicted.size()) throw ConfigError("label vectors differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++(*this)(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (auto c : counts_) s += c;
  return s;
}

double mcc(const ConfusionMatrix& cm) {
  const std::size_t k = cm.classes();
  double correct = 0.0, s = 0.0, pt = 0.0, pp = 0.0, tt = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += static_cast<double>(cm(i, j));
      col += static_cast<double>(cm(j, i));
    }
    correct += static_cast<double>(cm(i, i));
    s += row;
    pt += col * row;
    pp += col * col;
    tt += row * row;
  }
  const double denom = (s * s - pp) * (s * s - tt);
  if (denom <= 0.0) return 0.0;
  return (correct * s - pt) / std::sqrt(denom);
}

double mcc(std::span<const int> truth, std::span<const int> predicted, std::size_t k) {
  return mcc(ConfusionMatrix(truth, predicted, k));
}

double accuracy(const ConfusionMatrix& cm) {
  const auto n = cm.total();
  if (n == 0) return 0.0;
  std::size_t c = 0;
  for (std::size_t i = 0; i < cm.classes(); ++i) c += cm(i, i);
  return static_cast<double>(c) / static_cast<double>(n);
}

double fitness_from_mcc(double mcc_value) {
  if (!(mcc_value >= -1.0 - 1e-12 && mcc_value <= 1.0 + 1e-12)) throw ConfigError("MCC outside [-1, 1]");
  return std::clamp((1.0 - mcc_value) / 2.0, 0.0, 1.0);
}

UsageReport data_usage(const Genome& genome, std::size_t max_instances, std::size_t max_features) {
  UsageReport u;
  if (genome.is_gene && max_instances > 0) {
    u.pct_instances = static_cast<double>(genome.is_gene->size()) / static_cast<double>(max_instances);
  }
  if (genome.fs_gene && max_features > 0) {
    u.pct_features = static_cast<double>(genome.fs_gene->size()) / static_cast<double>(max_features);
  }
  u.pct_data = u.pct_instances * u.pct_features;
  return u;
}

DrMode dr_mode(const Genome& genome) {
  if (genome.is_gene && genome.fs_gene) return DrMode::IsFs;
  if (genome.is_gene) return DrMode::IsOnly;
  if (genome.fs_gene) return DrMode::FsOnly;
  return DrMode::None;
}

std::string to_string(DrMode mode) {
  switch (mode) {
    case DrMode::None: return "None";
    case DrMode::IsOnly: return "IS-only";
    case DrMode::FsOnly: return "FS-only";
    case DrMode::IsFs: return "IS+FS";
  }
  return "unknown";
}

std::array<std::size_t, 4> dr_histogram(std::span<const DrMode> modes) {
  std::array<std::size_t, 4> h{};
  for (auto m : modes) ++h[static_cast<std::size_t>(m)];
  return h;
}

}  // namespace edca
