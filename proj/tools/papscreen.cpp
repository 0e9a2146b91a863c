#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "pap/config.hpp"
#include "pap/discdetect.hpp"
#include "pap/image_io.hpp"
#include "pap/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// One JSON object per line on stdout; tests and scripts parse these.
void log_event(json j) { std::cout << j.dump() << "\n"; }

struct CommonOpts {
  std::string config_path;
  std::optional<pap::Seed> seed;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "Run-config JSON file (defaults apply when omitted)");
  cmd->add_option("--seed", o.seed, "Override the config seed");
  cmd->add_option("--workers", o.workers, "Override the config worker count");
  cmd->add_option("--out", o.output_dir, "Override the config output directory");
}

pap::RunConfig resolve_config(const CommonOpts& o) {
  pap::RunConfig cfg =
      o.config_path.empty() ? pap::RunConfig{} : pap::RunConfig::from_file(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.workers) cfg.workers = *o.workers;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  cfg.validate();
  omp_set_num_threads(cfg.workers);
  return cfg;
}

void prepare_output_dir(const pap::RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  cfg.write_effective((fs::path(cfg.output_dir) / "effective_config.json").string());
}

pap::GrayImage mask_to_gray(const pap::BinaryMask& m) {
  pap::GrayImage g(m.width, m.height);
  for (size_t i = 0; i < m.values.size(); ++i) g.values[i] = m.values[i] ? 1.0 : 0.0;
  return g;
}

int cmd_synth(const CommonOpts& opts) {
  pap::RunConfig cfg = resolve_config(opts);
  prepare_output_dir(cfg);
  pap::DatasetManifest m = pap::generate_dataset(cfg.seed, cfg.subjects, cfg.images_per_subject,
                                                 cfg.synth, cfg.output_dir);
  size_t positives = 0;
  for (const auto& r : m.records) positives += r.label == pap::Label::papilledema;
  log_event({{"event", "synth_done"},
             {"images", m.records.size()},
             {"subjects", m.subjects().size()},
             {"positives", positives},
             {"output_dir", cfg.output_dir}});
  return 0;
}

int cmd_detect(const CommonOpts& opts, const std::vector<std::string>& images) {
  pap::RunConfig cfg = resolve_config(opts);
  prepare_output_dir(cfg);
  const fs::path out(cfg.output_dir);
  for (const std::string& path : images) {
    const pap::FundusImage img = pap::load_image(path);
    const pap::DiscProposal prop = pap::propose_disc(img, cfg.morphology);
    const std::string stem = fs::path(path).stem().string();

    pap::save_gray(pap::equalized_red(img), (out / (stem + "_equalized.png")).string());
    pap::save_gray(mask_to_gray(pap::retina_mask(pap::red_plane(img), cfg.morphology)),
                   (out / (stem + "_retina_mask.png")).string());
    pap::save_image(prop.crop, (out / (stem + "_crop.png")).string());
    if (!prop.used_fallback)
      pap::save_gray(mask_to_gray(prop.disc_mask), (out / (stem + "_disc_mask.png")).string());

    const json sidecar{
        {"box",
         {{"x0", prop.source_box.x0},
          {"y0", prop.source_box.y0},
          {"x1", prop.source_box.x1},
          {"y1", prop.source_box.y1}}},
        {"used_fallback", prop.used_fallback},
        {"area", prop.component_area},
        {"eccentricity", prop.component_eccentricity},
        {"retina_circle",
         {{"cx", prop.retina_circle.cx}, {"cy", prop.retina_circle.cy}, {"r", prop.retina_circle.r}}},
    };
    std::ofstream side((out / (stem + "_disc.json")).string());
    side << sidecar.dump(2) << "\n";

    log_event({{"event", "detect"},
               {"image", path},
               {"used_fallback", prop.used_fallback},
               {"box", {prop.source_box.x0, prop.source_box.y0, prop.source_box.x1,
                        prop.source_box.y1}}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explainable papilledema screening pipeline"};
  app.require_subcommand(1);

  CommonOpts synth_opts;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic labeled fundus dataset");
  add_common(synth, synth_opts);

  CommonOpts detect_opts;
  std::vector<std::string> detect_images;
  CLI::App* detect = app.add_subcommand("detect", "Run optic-disc detection on fundus images");
  add_common(detect, detect_opts);
  detect->add_option("images", detect_images, "Input PNG images")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_opts);
    if (detect->parsed()) return cmd_detect(detect_opts, detect_images);
  } catch (const std::exception& e) {
    std::cerr << "papscreen: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
