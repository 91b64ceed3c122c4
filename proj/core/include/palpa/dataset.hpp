#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "palpa/image.hpp"
#include "palpa/phantom.hpp"

namespace palpa {

/// Press schedule for the labelled phantom set. The default reproduces a
/// balanced design: 5 diameters x 7 burial depths x 4 presses at 1000 g
/// against 4 homogeneous loads x 35 presses.
struct DatasetSpec {
  std::vector<double> ball_diameters_mm{2, 4, 6, 8, 10};
  std::vector<double> burial_depths_mm{1, 2, 3, 4, 5, 6, 7};
  int presses_per_tumor = 4;
  double tumor_mass_g = 1000.0;
  std::vector<double> negative_masses_g{1000, 1100, 1200, 1300};
  int presses_per_negative_mass = 35;
  /// Presses land uniformly within this radius of the tumour axis; 0 = centred.
  double max_lateral_offset_mm = 0.0;

  std::size_t positive_count() const;
  std::size_t negative_count() const;
  void validate() const;
};

struct PhantomSample {
  std::size_t id = 0;
  bool tumor = false;
  PhantomConfig config;
  std::uint64_t seed = 0;
  RgbImage reference;  // I_n, unloaded membrane
  RgbImage contact;    // I_w, loaded membrane
  DeformationMap truth;
};

/// Renders one press: fresh sensor noise for both readings, truth from the contact solve.
PhantomSample simulate_press(const PhantomConfig& cfg, const MembraneModel& model,
                             std::uint64_t seed);

/// Positives first, then negatives; sample i is a pure function of (spec, seed, i).
std::vector<PhantomSample> generate_phantom_dataset(const DatasetSpec& spec,
                                                    const TissueParams& tissue,
                                                    const MembraneModel& model,
                                                    std::uint64_t seed);

/// Directory layout: sample_NNNN_{ref,contact}.ppm, sample_NNNN_truth.dmap and samples.csv.
void write_phantom_dataset(const std::filesystem::path& dir,
                           const std::vector<PhantomSample>& samples);
std::vector<PhantomSample> read_phantom_dataset(const std::filesystem::path& dir);

std::string sample_stem(std::size_t id);

}  // namespace palpa
