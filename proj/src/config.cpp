#include "pap/config.hpp"

#include <fstream>
#include <initializer_list>
#include <string>

namespace pap {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const char* section,
                    std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error(std::string("config: '") + section + "' must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw Error(std::string("config: unknown key '") + section + "." + item.key() + "'");
  }
}

template <typename T>
void read(const json& j, const char* section, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw Error(std::string("config: bad value for '") + section + "." + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  if (workers < 1) throw Error("config: workers must be >= 1");
  if (subjects < 1) throw Error("config: subjects must be >= 1");
  if (images_per_subject < 1) throw Error("config: images_per_subject must be >= 1");
  if (output_dir.empty()) throw Error("config: output_dir must not be empty");
  synth.validate();
  morphology.validate();
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  reject_unknown(j, "", {"seed", "workers", "output_dir", "subjects", "images_per_subject",
                         "manifest", "synth", "morphology"});
  read(j, "", "seed", c.seed);
  read(j, "", "workers", c.workers);
  read(j, "", "output_dir", c.output_dir);
  read(j, "", "subjects", c.subjects);
  read(j, "", "images_per_subject", c.images_per_subject);
  read(j, "", "manifest", c.manifest);

  if (j.contains("synth")) {
    const json& s = j.at("synth");
    reject_unknown(s, "synth",
                   {"image_size", "retina_radius_frac", "disc_radius_frac", "vessel_count",
                    "noise_sigma", "class_effect", "render_disc"});
    read(s, "synth", "image_size", c.synth.image_size);
    read(s, "synth", "retina_radius_frac", c.synth.retina_radius_frac);
    read(s, "synth", "disc_radius_frac", c.synth.disc_radius_frac);
    read(s, "synth", "vessel_count", c.synth.vessel_count);
    read(s, "synth", "noise_sigma", c.synth.noise_sigma);
    read(s, "synth", "class_effect", c.synth.class_effect);
    read(s, "synth", "render_disc", c.synth.render_disc);
  }
  if (j.contains("morphology")) {
    const json& m = j.at("morphology");
    reject_unknown(m, "morphology",
                   {"open_radius_frac", "close_radius_frac", "mean_filter_radius_frac",
                    "box_enlarge", "eccentricity_max", "area_min_frac", "area_max_frac"});
    read(m, "morphology", "open_radius_frac", c.morphology.open_radius_frac);
    read(m, "morphology", "close_radius_frac", c.morphology.close_radius_frac);
    read(m, "morphology", "mean_filter_radius_frac", c.morphology.mean_filter_radius_frac);
    read(m, "morphology", "box_enlarge", c.morphology.box_enlarge);
    read(m, "morphology", "eccentricity_max", c.morphology.eccentricity_max);
    read(m, "morphology", "area_min_frac", c.morphology.area_min_frac);
    read(m, "morphology", "area_max_frac", c.morphology.area_max_frac);
  }
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    // nlohmann reports the position; forward it so typos are findable.
    throw Error(std::string("config: ") + e.what());
  }
  return from_json(j);
}

nlohmann::json RunConfig::to_json() const {
  return json{
      {"seed", seed},
      {"workers", workers},
      {"output_dir", output_dir},
      {"subjects", subjects},
      {"images_per_subject", images_per_subject},
      {"manifest", manifest},
      {"synth",
       {{"image_size", synth.image_size},
        {"retina_radius_frac", synth.retina_radius_frac},
        {"disc_radius_frac", synth.disc_radius_frac},
        {"vessel_count", synth.vessel_count},
        {"noise_sigma", synth.noise_sigma},
        {"class_effect", synth.class_effect},
        {"render_disc", synth.render_disc}}},
      {"morphology",
       {{"open_radius_frac", morphology.open_radius_frac},
        {"close_radius_frac", morphology.close_radius_frac},
        {"mean_filter_radius_frac", morphology.mean_filter_radius_frac},
        {"box_enlarge", morphology.box_enlarge},
        {"eccentricity_max", morphology.eccentricity_max},
        {"area_min_frac", morphology.area_min_frac},
        {"area_max_frac", morphology.area_max_frac}}},
  };
}

void RunConfig::write_effective(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("config: cannot write '" + path + "'");
  out << to_json().dump(2) << "\n";
}

}  // namespace pap
