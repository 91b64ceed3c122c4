// palpa: command-line front end. Every verb writes a run manifest that
// `palpa rerun --manifest FILE` can replay bit-exactly.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "palpa/calibration.hpp"
#include "palpa/characterization.hpp"
#include "palpa/config.hpp"
#include "palpa/dataset.hpp"
#include "palpa/detection.hpp"
#include "palpa/image_io.hpp"
#include "palpa/imprint.hpp"
#include "palpa/pipeline.hpp"
#include "palpa/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Config documents recorded in a manifest take precedence over file flags on replay.
struct Replay {
  std::optional<json> sim;
  std::optional<json> dataset_spec;
  std::optional<json> phantom;
  std::optional<json> params;
};

struct Run {
  std::string command;
  std::vector<std::string> args;
  std::optional<std::uint64_t> seed;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string manifest_path;
};

std::string manifest_for(const std::string& out) {
  fs::path p(out);
  if (!p.has_filename()) p = p.parent_path();
  return p.string() + ".manifest.json";
}

void write_text(const fs::path& path, const std::string& text) {
  const std::vector<std::uint8_t> bytes(text.begin(), text.end());
  palpa::write_file_bytes(path, bytes);
}

void write_manifest(const Run& run, double seconds) {
  if (run.manifest_path.empty()) return;
  json doc = {{"format", "palpa-run-manifest"},
              {"tool_version", palpa::version()},
              {"command", run.command},
              {"args", run.args},
              {"seed", run.seed ? json(*run.seed) : json(nullptr)},
              {"config", run.config},
              {"inputs", run.inputs},
              {"outputs", run.outputs},
              {"wall_clock_seconds", seconds}};
  write_text(run.manifest_path, doc.dump(2) + "\n");
}

palpa::SimConfig resolve_sim(const std::string& path, const Replay& replay, Run& run) {
  palpa::SimConfig cfg;
  if (replay.sim) {
    cfg = palpa::sim_config_from_json(replay.sim->dump());
  } else if (!path.empty()) {
    cfg = palpa::load_sim_config(path);
    run.inputs.push_back(path);
  }
  run.config["sim"] = json::parse(palpa::to_json(cfg));
  return cfg;
}

std::string report_path(const std::string& prefix, const char* ext) { return prefix + ext; }

void save_report(Run& run, const std::string& prefix, const json& doc, const std::string& csv) {
  if (prefix.empty()) return;
  for (const auto& out : run.outputs) {
    for (const char* ext : {".json", ".csv"}) {
      if (fs::weakly_canonical(out) == fs::weakly_canonical(report_path(prefix, ext))) {
        throw std::runtime_error("report " + report_path(prefix, ext) + " would overwrite an output");
      }
    }
  }
  write_text(report_path(prefix, ".json"), doc.dump(2) + "\n");
  write_text(report_path(prefix, ".csv"), csv);
  run.outputs.push_back(report_path(prefix, ".json"));
  run.outputs.push_back(report_path(prefix, ".csv"));
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

struct LabelledFeatures {
  std::vector<palpa::FeatureVector> features;
  std::vector<palpa::Label> labels;
  std::vector<std::size_t> ids;
};

LabelledFeatures dataset_features(const std::string& dir, const palpa::CalibrationModel& model,
                                  const palpa::SensorGeometry& geom) {
  LabelledFeatures out;
  for (const auto& s : palpa::read_phantom_dataset(dir)) {
    out.features.push_back(palpa::extract_features(palpa::reconstruct(model, s.reference, s.contact, geom)));
    out.labels.push_back(s.tumor ? palpa::Label::tumor : palpa::Label::no_tumor);
    out.ids.push_back(s.id);
  }
  return out;
}

json evaluation_json(const palpa::EvaluationReport& r) {
  return {{"accuracy", r.accuracy()},
          {"true_positive", r.true_positive},
          {"false_positive", r.false_positive},
          {"true_negative", r.true_negative},
          {"false_negative", r.false_negative}};
}

void print_sweep_csv(std::string& csv, const char* tag, const palpa::ForceSweep& sweep) {
  for (const auto& p : sweep.points) {
    csv += std::string(tag) + "," + fmt(p.force_n) + "," + fmt(p.mean_depth_mm) + "," +
           fmt(p.max_depth_mm) + "," + (p.clamped ? "1" : "0") + "\n";
  }
}

json sweep_json(const palpa::ForceSweep& sweep) {
  json pts = json::array();
  for (const auto& p : sweep.points) {
    pts.push_back({{"force_n", p.force_n},
                   {"mean_depth_mm", p.mean_depth_mm},
                   {"max_depth_mm", p.max_depth_mm},
                   {"clamped", p.clamped}});
  }
  return pts;
}

int dispatch(const std::vector<std::string>& args, const Replay& replay);

int run_app(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<const char*> argv{"palpa"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return -1;
}

int dispatch(const std::vector<std::string>& args, const Replay& replay) {
  CLI::App app{"Vision-based tactile palpation toolkit", "palpa"};
  app.set_version_flag("--version", std::string(palpa::version()));
  app.require_subcommand(1);

  Run run;
  run.args = args;
  std::string manifest;
  std::optional<std::uint64_t> seed;
  std::string sim_path;
  std::function<void()> action;

  auto add_common = [&](CLI::App* sub, bool with_seed, bool with_config) {
    sub->add_option("--manifest", manifest, "Run manifest path (default: <out>.manifest.json)");
    if (with_seed) sub->add_option("--seed", seed, "Random seed")->default_str("0");
    if (with_config) sub->add_option("--config", sim_path, "Simulator config JSON");
  };
  auto seed_value = [&] {
    run.seed = seed.value_or(0);
    return *run.seed;
  };

  // phantom
  auto* phantom = app.add_subcommand("phantom", "Simulate one press on a phantom");
  std::string phantom_path, out;
  bool tumor = false;
  double diameter = 6.0, burial = 3.0, mass = 1000.0;
  std::vector<double> offset{0.0, 0.0};
  phantom->add_option("--phantom", phantom_path, "Phantom config JSON (overrides the flags below)");
  phantom->add_flag("--tumor", tumor, "Embed a tumour");
  phantom->add_option("--diameter", diameter, "Tumour diameter, mm");
  phantom->add_option("--burial", burial, "Burial depth, mm");
  phantom->add_option("--mass", mass, "Applied mass, g");
  phantom->add_option("--offset", offset, "Lateral offset x y, mm")->expected(2);
  phantom->add_option("--out", out, "Output directory")->required();
  add_common(phantom, true, true);
  phantom->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      palpa::PhantomConfig cfg;
      if (replay.phantom) {
        cfg = palpa::phantom_config_from_json(replay.phantom->dump(), sim.tissue);
      } else if (!phantom_path.empty()) {
        cfg = palpa::phantom_config_from_json(palpa::read_text_file(phantom_path), sim.tissue);
        run.inputs.push_back(phantom_path);
      } else {
        cfg = palpa::PhantomConfig::with_tissue(sim.tissue);
        cfg.tumor_present = tumor;
        cfg.ball_diameter_mm = diameter;
        cfg.burial_depth_mm = burial;
        cfg.applied_mass_g = mass;
        cfg.offset_x_mm = offset[0];
        cfg.offset_y_mm = offset[1];
        cfg.validate();
      }
      run.config["phantom"] = json::parse(palpa::to_json(cfg));
      const palpa::MembraneModel model(sim.geometry, sim.membrane);
      const auto sample = palpa::simulate_press(cfg, model, seed_value());
      fs::create_directories(out);
      const fs::path dir(out);
      palpa::save_ppm(dir / "ref.ppm", sample.reference);
      palpa::save_ppm(dir / "contact.ppm", sample.contact);
      palpa::save_dmap(dir / "truth.dmap", sample.truth);
      write_text(dir / "phantom.json", palpa::to_json(cfg));
      for (const char* f : {"ref.ppm", "contact.ppm", "truth.dmap", "phantom.json"}) {
        run.outputs.push_back((dir / f).string());
      }
      std::cout << "force " << fmt(cfg.applied_force_n()) << " N, tumour "
                << (cfg.tumor_present ? "yes" : "no") << "\n";
    };
  });

  // imprint
  auto* imprint = app.add_subcommand("imprint", "Amplified difference image of a reading pair");
  std::string ref_path, contact_path;
  palpa::ImprintParams ip;
  imprint->add_option("--ref", ref_path, "Reference (no-contact) PPM")->required();
  imprint->add_option("--contact", contact_path, "Contact PPM")->required();
  imprint->add_option("--alpha", ip.alpha, "Amplification")->capture_default_str();
  imprint->add_option("--beta", ip.beta, "Offset")->capture_default_str();
  imprint->add_option("--out", out, "Output PPM")->required();
  add_common(imprint, false, false);
  imprint->callback([&] {
    action = [&] {
      if (replay.params) {
        ip.alpha = replay.params->at("alpha").get<double>();
        ip.beta = replay.params->at("beta").get<double>();
      }
      ip.validate();
      run.config["params"] = {{"alpha", ip.alpha}, {"beta", ip.beta}};
      const auto img = palpa::augmented_imprint(palpa::load_ppm(ref_path), palpa::load_ppm(contact_path), ip);
      palpa::save_ppm(out, img);
      run.inputs = {ref_path, contact_path};
      run.outputs.push_back(out);
    };
  });

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Train the colour-to-depth network");
  std::string report;
  calibrate->add_option("--out", out, "Output model JSON")->required();
  calibrate->add_option("--report", report, "Training report prefix (.json and .csv)");
  add_common(calibrate, true, true);
  calibrate->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      const std::uint64_t s = seed_value();
      const auto cal = palpa::calibrate(sim, s);
      const auto& cm = cal.model;
      const auto& rep = cal.report;
      palpa::save_calibration_model(out, cm);
      run.outputs.push_back(out);
      std::cout << "rows " << cal.rows << ", epochs " << rep.epoch_loss.size() << ", final mse "
                << fmt(rep.epoch_loss.back()) << " mm^2\n";
      std::string csv = "epoch,mse_mm2\n";
      for (std::size_t e = 0; e < rep.epoch_loss.size(); ++e) {
        csv += std::to_string(e + 1) + "," + fmt(rep.epoch_loss[e]) + "\n";
      }
      save_report(run, report, {{"rows", cal.rows}, {"steps", rep.steps}, {"epoch_loss", rep.epoch_loss}}, csv);
    };
  });

  // reconstruct
  auto* recon = app.add_subcommand("reconstruct", "Depth map from a reading pair");
  std::string model_path;
  recon->add_option("--model", model_path, "Calibration model JSON")->required();
  recon->add_option("--ref", ref_path, "Reference PPM")->required();
  recon->add_option("--contact", contact_path, "Contact PPM")->required();
  recon->add_option("--out", out, "Output DMAP")->required();
  add_common(recon, false, true);
  recon->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      const auto cm = palpa::load_calibration_model(model_path);
      const auto map = palpa::reconstruct(cm, palpa::load_ppm(ref_path), palpa::load_ppm(contact_path), sim.geometry);
      palpa::save_dmap(out, map);
      run.inputs.insert(run.inputs.end(), {model_path, ref_path, contact_path});
      run.outputs.push_back(out);
      const auto f = palpa::extract_features(map);
      std::cout << "mu " << fmt(f.mu) << " mm, sigma " << fmt(f.sigma) << " mm\n";
    };
  });

  // dataset
  auto* dataset = app.add_subcommand("dataset", "Generate the labelled phantom press set");
  std::string spec_arg = "default";
  double max_offset = -1.0;
  dataset->add_option("--spec", spec_arg, "'default' or a dataset spec JSON")->capture_default_str();
  dataset->add_option("--max-offset", max_offset, "Override the lateral offset radius, mm");
  dataset->add_option("--out", out, "Output directory")->required();
  add_common(dataset, true, true);
  dataset->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      palpa::DatasetSpec spec;
      if (replay.dataset_spec) {
        spec = palpa::dataset_spec_from_json(replay.dataset_spec->dump());
      } else {
        if (spec_arg != "default") {
          spec = palpa::dataset_spec_from_json(palpa::read_text_file(spec_arg));
          run.inputs.push_back(spec_arg);
        }
        if (max_offset >= 0.0) spec.max_lateral_offset_mm = max_offset;
        spec.validate();
      }
      run.config["dataset_spec"] = json::parse(palpa::to_json(spec));
      const palpa::MembraneModel model(sim.geometry, sim.membrane);
      const auto samples = palpa::generate_phantom_dataset(spec, sim.tissue, model, seed_value());
      palpa::write_phantom_dataset(out, samples);
      run.outputs.push_back(out);
      std::cout << "wrote " << samples.size() << " samples (" << spec.positive_count() << " tumour, "
                << spec.negative_count() << " homogeneous)\n";
    };
  });

  // train-detector
  auto* trainer = app.add_subcommand("train-detector", "Fit the linear tumour detector");
  std::string dataset_dir;
  double fraction = 0.8;
  palpa::SvmConfig svm;
  trainer->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  trainer->add_option("--model", model_path, "Calibration model JSON")->required();
  trainer->add_option("--train-fraction", fraction, "Stratified training fraction")->capture_default_str();
  trainer->add_option("--C", svm.C, "Soft-margin penalty")->capture_default_str();
  trainer->add_option("--out", out, "Output detector JSON")->required();
  trainer->add_option("--report", report, "Report prefix (.json and .csv)");
  add_common(trainer, true, true);
  trainer->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      if (replay.params) {
        fraction = replay.params->at("train_fraction").get<double>();
        svm.C = replay.params->at("C").get<double>();
      }
      run.config["params"] = {{"train_fraction", fraction}, {"C", svm.C}};
      const auto cm = palpa::load_calibration_model(model_path);
      const auto data = dataset_features(dataset_dir, cm, sim.geometry);
      run.inputs.insert(run.inputs.end(), {dataset_dir, model_path});
      const auto split = palpa::stratified_split(data.labels, fraction, seed_value());
      auto pick = [&](const std::vector<std::size_t>& idx, std::vector<palpa::FeatureVector>& f,
                      std::vector<palpa::Label>& l) {
        for (auto i : idx) {
          f.push_back(data.features[i]);
          l.push_back(data.labels[i]);
        }
      };
      std::vector<palpa::FeatureVector> ftr, fte;
      std::vector<palpa::Label> ltr, lte;
      pick(split.train, ftr, ltr);
      pick(split.test, fte, lte);
      const auto det = palpa::train_detector(ftr, ltr, svm);
      palpa::save_detector_model(out, det);
      run.outputs.push_back(out);
      const auto rtr = palpa::evaluate(det, ftr, ltr);
      json doc = {{"w_mu", det.w_mu}, {"w_sigma", det.w_sigma}, {"bias", det.bias},
                  {"train", evaluation_json(rtr)}};
      std::printf("w_mu %.4f  w_sigma %.4f  b %.4f\n", det.w_mu, det.w_sigma, det.bias);
      std::printf("train accuracy %.4f (%zu samples)\n", rtr.accuracy(), ftr.size());
      std::string csv = "sample_id,split,label,mu,sigma,decision_value\n";
      auto rows = [&](const std::vector<std::size_t>& idx, const char* tag) {
        for (auto i : idx) {
          csv += std::to_string(data.ids[i]) + "," + tag + "," + palpa::label_name(data.labels[i]) + "," +
                 fmt(data.features[i].mu) + "," + fmt(data.features[i].sigma) + "," +
                 fmt(palpa::decision_value(det, data.features[i])) + "\n";
        }
      };
      rows(split.train, "train");
      if (!fte.empty()) {
        const auto rte = palpa::evaluate(det, fte, lte);
        doc["test"] = evaluation_json(rte);
        std::printf("test accuracy %.4f (%zu samples)\n", rte.accuracy(), fte.size());
        rows(split.test, "test");
      }
      save_report(run, report, doc, csv);
    };
  });

  // detect
  auto* detect = app.add_subcommand("detect", "Classify one depth map");
  std::string detector_path, map_path;
  detect->add_option("--detector", detector_path, "Detector JSON")->required();
  detect->add_option("--map", map_path, "Depth map DMAP")->required();
  add_common(detect, false, false);
  detect->callback([&] {
    action = [&] {
      const auto det = palpa::load_detector_model(detector_path);
      const auto f = palpa::extract_features(palpa::load_dmap(map_path));
      const double v = palpa::decision_value(det, f);
      run.inputs = {detector_path, map_path};
      json doc = {{"label", palpa::label_name(palpa::classify(v))},
                  {"decision_value", v},
                  {"mu", f.mu},
                  {"sigma", f.sigma}};
      std::cout << doc.dump() << "\n";
    };
  });

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a detector on a dataset");
  evaluate->add_option("--detector", detector_path, "Detector JSON")->required();
  evaluate->add_option("--dataset", dataset_dir, "Dataset directory")->required();
  evaluate->add_option("--model", model_path, "Calibration model JSON")->required();
  evaluate->add_option("--report", report, "Report prefix (.json and .csv)")->required();
  add_common(evaluate, false, true);
  evaluate->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      const auto det = palpa::load_detector_model(detector_path);
      const auto cm = palpa::load_calibration_model(model_path);
      const auto data = dataset_features(dataset_dir, cm, sim.geometry);
      run.inputs.insert(run.inputs.end(), {detector_path, dataset_dir, model_path});
      const auto r = palpa::evaluate(det, data.features, data.labels);
      std::printf("              predicted tumour  predicted none\n");
      std::printf("tumour        %16zu  %14zu\n", r.true_positive, r.false_negative);
      std::printf("no tumour     %16zu  %14zu\n", r.false_positive, r.true_negative);
      std::printf("accuracy %.4f\n", r.accuracy());
      std::string csv = "sample_id,label,predicted,mu,sigma,decision_value\n";
      for (std::size_t i = 0; i < data.ids.size(); ++i) {
        csv += std::to_string(data.ids[i]) + "," + palpa::label_name(data.labels[i]) + "," +
               palpa::label_name(r.predicted[i]) + "," + fmt(data.features[i].mu) + "," +
               fmt(data.features[i].sigma) + "," + fmt(r.decision_values[i]) + "\n";
      }
      save_report(run, report, evaluation_json(r), csv);
    };
  });

  // characterize
  auto* charac = app.add_subcommand("characterize", "Sensitivity, repeatability and hysteresis");
  charac->add_option("--model", model_path, "Calibration model JSON")->required();
  charac->add_option("--report", report, "Report prefix (.json and .csv)")->required();
  add_common(charac, true, true);
  charac->callback([&] {
    action = [&] {
      const auto sim = resolve_sim(sim_path, replay, run);
      const palpa::MembraneModel model(sim.geometry, sim.membrane);
      const palpa::MlpReconstructor reconstructor(palpa::load_calibration_model(model_path), sim.geometry);
      run.inputs.push_back(model_path);
      const auto s = palpa::run_characterization(model, sim.rig, reconstructor, seed_value());
      const auto& sens = s.sensitivity;
      auto show = [](const char* name, const std::optional<double>& v, const char* unit) {
        if (v) std::printf("%-22s %10.4f %s\n", name, *v, unit);
        else std::printf("%-22s %10s\n", name, "n/a");
      };
      show("detection threshold", sens.threshold_n, "N");
      show("resolution", sens.resolution_n, "N");
      show("saturation", sens.saturation_n, "N");
      std::printf("%-22s %10.5f mm\n", "noise floor", sens.noise_floor_mm);
      std::printf("%-22s %10.2f %%\n", "repeatability", s.r_pct);
      std::printf("%-22s %10.2f %%\n", "hysteresis", s.hysteresis.h_pct);
      std::printf("%-22s %10.3f\n", "null difference std", s.null_std);
      json doc = {{"threshold_N", optional_json(sens.threshold_n)},
                  {"resolution_N", optional_json(sens.resolution_n)},
                  {"saturation_N", optional_json(sens.saturation_n)},
                  {"noise_floor_mm", sens.noise_floor_mm},
                  {"baseline_mm", sens.baseline_mm},
                  {"r_pct", s.r_pct},
                  {"h_pct", s.hysteresis.h_pct},
                  {"null_std", s.null_std},
                  {"sensitivity_sweep", sweep_json(sens.sweep)},
                  {"loading", sweep_json(s.hysteresis.loading)},
                  {"unloading", sweep_json(s.hysteresis.unloading)},
                  {"repeatability_steps_mm", s.repeatability_trials.steps_mm},
                  {"repeatability_trials_mm", s.repeatability_trials.trials}};
      std::string csv = "series,force_n,mean_depth_mm,max_depth_mm,clamped\n";
      print_sweep_csv(csv, "sensitivity", sens.sweep);
      print_sweep_csv(csv, "loading", s.hysteresis.loading);
      print_sweep_csv(csv, "unloading", s.hysteresis.unloading);
      save_report(run, report, doc, csv);
    };
  });

  // rerun
  auto* rerun = app.add_subcommand("rerun", "Replay a run manifest");
  std::string replay_path;
  rerun->add_option("--manifest", replay_path, "Manifest written by an earlier run")->required();
  rerun->callback([&] {
    action = [&] {
      const json doc = json::parse(palpa::read_text_file(replay_path));
      if (doc.value("format", "") != "palpa-run-manifest") {
        throw palpa::ConfigError("not a run manifest: " + replay_path);
      }
      Replay r;
      const json& cfg = doc.at("config");
      if (cfg.contains("sim")) r.sim = cfg.at("sim");
      if (cfg.contains("dataset_spec")) r.dataset_spec = cfg.at("dataset_spec");
      if (cfg.contains("phantom")) r.phantom = cfg.at("phantom");
      if (cfg.contains("params")) r.params = cfg.at("params");
      const int code = dispatch(doc.at("args").get<std::vector<std::string>>(), r);
      if (code != 0) throw std::runtime_error("replay failed with exit code " + std::to_string(code));
    };
  });

  if (const int code = run_app(app, args); code >= 0) return code;

  const auto* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  const bool replaying = run.command == "rerun";
  if (!replaying) {
    if (!manifest.empty()) run.manifest_path = manifest;
    else if (!out.empty()) run.manifest_path = manifest_for(out);
    else if (!report.empty()) run.manifest_path = report + ".manifest.json";
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    action();
    if (!replaying) {
      write_manifest(run, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  } catch (const std::exception& e) {
    std::cerr << "palpa " << run.command << ": " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, {});
}
