#include "palpa/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "palpa/image_io.hpp"
#include "palpa/random.hpp"

namespace palpa {

namespace {

constexpr char kCsvHeader[] =
    "sample_id,label,ball_diameter_mm,burial_depth_mm,applied_mass_g,offset_x_mm,offset_y_mm,seed";

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::size_t DatasetSpec::positive_count() const {
  return ball_diameters_mm.size() * burial_depths_mm.size() *
         static_cast<std::size_t>(presses_per_tumor);
}

std::size_t DatasetSpec::negative_count() const {
  return negative_masses_g.size() * static_cast<std::size_t>(presses_per_negative_mass);
}

void DatasetSpec::validate() const {
  if (presses_per_tumor < 0 || presses_per_negative_mass < 0) {
    throw std::invalid_argument("press counts must be non-negative");
  }
  if (positive_count() + negative_count() == 0) throw std::invalid_argument("dataset spec is empty");
  if (!(tumor_mass_g > 0.0)) throw std::invalid_argument("tumour press mass must be positive");
  for (double m : negative_masses_g) {
    if (!(m > 0.0)) throw std::invalid_argument("negative press masses must be positive");
  }
  if (max_lateral_offset_mm < 0.0) throw std::invalid_argument("lateral offset radius must be >= 0");
}

std::string sample_stem(std::size_t id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%04zu", id);
  return buf;
}

PhantomSample simulate_press(const PhantomConfig& cfg, const MembraneModel& model,
                             std::uint64_t seed) {
  PhantomSample s;
  s.tumor = cfg.tumor_present;
  s.config = cfg;
  s.seed = seed;
  const ContactSolution sol = contact_solve(cfg, model.geometry(), model);
  s.truth = sol.deformation;
  s.reference = render_reading(DeformationMap(model.geometry()), model, derive_seed(seed, 0));
  s.contact = render_reading(s.truth, model, derive_seed(seed, 1));
  return s;
}

std::vector<PhantomSample> generate_phantom_dataset(const DatasetSpec& spec,
                                                    const TissueParams& tissue,
                                                    const MembraneModel& model,
                                                    std::uint64_t seed) {
  spec.validate();
  std::vector<PhantomConfig> configs;
  for (double d : spec.ball_diameters_mm) {
    for (double depth : spec.burial_depths_mm) {
      for (int k = 0; k < spec.presses_per_tumor; ++k) {
        PhantomConfig cfg = PhantomConfig::with_tissue(tissue);
        cfg.tumor_present = true;
        cfg.ball_diameter_mm = d;
        cfg.burial_depth_mm = depth;
        cfg.applied_mass_g = spec.tumor_mass_g;
        configs.push_back(cfg);
      }
    }
  }
  for (double mass : spec.negative_masses_g) {
    for (int k = 0; k < spec.presses_per_negative_mass; ++k) {
      PhantomConfig cfg = PhantomConfig::with_tissue(tissue);
      cfg.applied_mass_g = mass;
      configs.push_back(cfg);
    }
  }

  std::vector<PhantomSample> samples;
  samples.reserve(configs.size());
  for (std::size_t id = 0; id < configs.size(); ++id) {
    const std::uint64_t sample_seed = derive_seed(seed, id);
    PhantomConfig cfg = configs[id];
    if (cfg.tumor_present && spec.max_lateral_offset_mm > 0.0) {
      SeqRng rng(derive_seed(sample_seed, 2));
      const double r = spec.max_lateral_offset_mm * std::sqrt(rng.uniform());
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      cfg.offset_x_mm = r * std::cos(theta);
      cfg.offset_y_mm = r * std::sin(theta);
    }
    PhantomSample s = simulate_press(cfg, model, sample_seed);
    s.id = id;
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_phantom_dataset(const std::filesystem::path& dir,
                           const std::vector<PhantomSample>& samples) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv << kCsvHeader << "\n";
  for (const auto& s : samples) {
    const std::string stem = sample_stem(s.id);
    save_ppm(dir / (stem + "_ref.ppm"), s.reference);
    save_ppm(dir / (stem + "_contact.ppm"), s.contact);
    save_dmap(dir / (stem + "_truth.dmap"), s.truth);
    csv << s.id << "," << (s.tumor ? "tumor" : "no-tumor") << ","
        << (s.tumor ? fmt_double(s.config.ball_diameter_mm) : "") << ","
        << (s.tumor ? fmt_double(s.config.burial_depth_mm) : "") << ","
        << fmt_double(s.config.applied_mass_g) << "," << fmt_double(s.config.offset_x_mm) << ","
        << fmt_double(s.config.offset_y_mm) << "," << s.seed << "\n";
  }
  const std::string text = csv.str();
  write_file_bytes(dir / "samples.csv",
                   {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<PhantomSample> read_phantom_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "samples.csv");
  if (!in) throw IoError(IoErrc::open_failed, "cannot open " + (dir / "samples.csv").string());
  std::string line;
  std::getline(in, line);
  if (line != kCsvHeader) {
    throw IoError(IoErrc::malformed_header, "samples.csv: unexpected header");
  }
  std::vector<PhantomSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv(line);
    while (cells.size() < 8) cells.emplace_back();
    PhantomSample s;
    try {
      s.id = std::stoull(cells[0]);
      if (cells[1] != "tumor" && cells[1] != "no-tumor") throw std::invalid_argument("label");
      s.tumor = cells[1] == "tumor";
      s.config.tumor_present = s.tumor;
      if (s.tumor) {
        s.config.ball_diameter_mm = std::stod(cells[2]);
        s.config.burial_depth_mm = std::stod(cells[3]);
      }
      s.config.applied_mass_g = std::stod(cells[4]);
      s.config.offset_x_mm = std::stod(cells[5]);
      s.config.offset_y_mm = std::stod(cells[6]);
      s.seed = std::stoull(cells[7]);
    } catch (const std::logic_error&) {
      throw IoError(IoErrc::malformed_header, "samples.csv: bad row '" + line + "'");
    }
    const std::string stem = sample_stem(s.id);
    s.reference = load_ppm(dir / (stem + "_ref.ppm"));
    s.contact = load_ppm(dir / (stem + "_contact.ppm"));
    s.truth = load_dmap(dir / (stem + "_truth.dmap"));
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace palpa
