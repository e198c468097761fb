#include "wsrd/pipeline/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wsrd {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(trim(cell)));
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  clustering.validate();
  plane_removal.validate();
  render.validate();
  gpc.validate();
  propagation.validate();
  if (training.eta < 0.0 || training.eta > 1.0)
    throw Error("eta must be in [0, 1]");
  if (training.epochs <= 0 || training.learning_rate <= 0.0)
    throw Error("invalid training config");
}

PipelineConfig PipelineConfig::parse(const std::string& text) {
  PipelineConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"",
       {{"seed", [&](const std::string& v) { cfg.seed = std::stoull(v); }}}},
      {"clustering",
       {{"sigma_d",
         [&](const std::string& v) { cfg.clustering.sigma_d = std::stod(v); }},
        {"sigma_c",
         [&](const std::string& v) { cfg.clustering.sigma_c = std::stod(v); }},
        {"sigma_s",
         [&](const std::string& v) { cfg.clustering.sigma_s = std::stod(v); }},
        {"voxel_leaf",
         [&](const std::string& v) {
           cfg.clustering.voxel_leaf = std::stod(v);
         }},
        {"min_cluster_points",
         [&](const std::string& v) {
           cfg.clustering.min_cluster_points = std::stoi(v);
         }},
        {"min_cluster_extent",
         [&](const std::string& v) {
           cfg.clustering.min_cluster_extent = std::stod(v);
         }}}},
      {"plane_removal",
       {{"inlier_threshold",
         [&](const std::string& v) {
           cfg.plane_removal.inlier_threshold = std::stod(v);
         }},
        {"min_plane_fraction",
         [&](const std::string& v) {
           cfg.plane_removal.min_plane_fraction = std::stod(v);
         }},
        {"max_iterations",
         [&](const std::string& v) {
           cfg.plane_removal.max_iterations = std::stoi(v);
         }},
        {"max_planes",
         [&](const std::string& v) {
           cfg.plane_removal.max_planes = std::stoi(v);
         }}}},
      {"render",
       {{"sample_count",
         [&](const std::string& v) {
           cfg.render.sample_count = std::stoi(v);
         }},
        {"noise_sigma",
         [&](const std::string& v) {
           cfg.render.noise_sigma = std::stod(v);
         }},
        {"rolls",
         [&](const std::string& v) { cfg.render.rolls = parse_list(v); }},
        {"pitch",
         [&](const std::string& v) { cfg.render.pitch = std::stod(v); }},
        {"yaw_start",
         [&](const std::string& v) { cfg.render.yaw_start = std::stod(v); }},
        {"yaw_end",
         [&](const std::string& v) { cfg.render.yaw_end = std::stod(v); }},
        {"yaw_step",
         [&](const std::string& v) { cfg.render.yaw_step = std::stod(v); }},
        {"camera_distance_factor",
         [&](const std::string& v) {
           cfg.render.camera_distance_factor = std::stod(v);
         }},
        {"image_size",
         [&](const std::string& v) { cfg.render.image_size = std::stoi(v); }},
        {"focal",
         [&](const std::string& v) { cfg.render.focal = std::stod(v); }},
        {"principal_u",
         [&](const std::string& v) {
           cfg.render.principal_u = std::stod(v);
         }},
        {"principal_v",
         [&](const std::string& v) {
           cfg.render.principal_v = std::stod(v);
         }},
        {"output_size",
         [&](const std::string& v) {
           cfg.render.output_size = std::stoi(v);
         }},
        {"hpr_gamma",
         [&](const std::string& v) { cfg.render.hpr_gamma = std::stod(v); }}}},
      {"gpc",
       {{"tol", [&](const std::string& v) { cfg.gpc.tol = std::stod(v); }},
        {"max_sweeps",
         [&](const std::string& v) { cfg.gpc.max_sweeps = std::stoi(v); }},
        {"restarts",
         [&](const std::string& v) { cfg.gpc.restarts = std::stoi(v); }}}},
      {"propagation",
       {{"tau",
         [&](const std::string& v) { cfg.propagation.tau = std::stod(v); }},
        {"conflict_policy",
         [&](const std::string& v) {
           if (v == "abandon")
             cfg.propagation.conflict_policy = ConflictPolicy::Abandon;
           else if (v == "highest-confidence")
             cfg.propagation.conflict_policy =
                 ConflictPolicy::HighestConfidence;
           else
             throw Error("unknown conflict_policy: " + v);
         }}}},
      {"training",
       {{"eta",
         [&](const std::string& v) { cfg.training.eta = std::stod(v); }},
        {"epochs",
         [&](const std::string& v) { cfg.training.epochs = std::stoi(v); }},
        {"learning_rate",
         [&](const std::string& v) {
           cfg.training.learning_rate = std::stod(v);
         }},
        {"batch_size",
         [&](const std::string& v) {
           cfg.training.batch_size = std::stoi(v);
         }}}}};

  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (!schema.count(section))
        throw Error("unknown config section: [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("bad config line " + std::to_string(lineno) + ": " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& keys = schema.at(section);
    auto it = keys.find(key);
    if (it == keys.end())
      throw Error("unknown config key: " +
                  (section.empty() ? key : section + "." + key));
    try {
      it->second(value);
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      throw Error("bad value for " + key + ": " + value);
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PipelineConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "seed = " << seed << "\n\n[clustering]\n";
  out << "sigma_d = " << clustering.sigma_d << '\n';
  out << "sigma_c = " << clustering.sigma_c << '\n';
  out << "sigma_s = " << clustering.sigma_s << '\n';
  out << "voxel_leaf = " << clustering.voxel_leaf << '\n';
  out << "min_cluster_points = " << clustering.min_cluster_points << '\n';
  out << "min_cluster_extent = " << clustering.min_cluster_extent << '\n';
  out << "\n[plane_removal]\n";
  out << "inlier_threshold = " << plane_removal.inlier_threshold << '\n';
  out << "min_plane_fraction = " << plane_removal.min_plane_fraction << '\n';
  out << "max_iterations = " << plane_removal.max_iterations << '\n';
  out << "max_planes = " << plane_removal.max_planes << '\n';
  out << "\n[render]\n";
  out << "sample_count = " << render.sample_count << '\n';
  if (render.noise_sigma) out << "noise_sigma = " << *render.noise_sigma
                              << '\n';
  out << "rolls = ";
  for (std::size_t i = 0; i < render.rolls.size(); ++i)
    out << (i ? "," : "") << render.rolls[i];
  out << '\n';
  out << "pitch = " << render.pitch << '\n';
  out << "yaw_start = " << render.yaw_start << '\n';
  out << "yaw_end = " << render.yaw_end << '\n';
  out << "yaw_step = " << render.yaw_step << '\n';
  out << "camera_distance_factor = " << render.camera_distance_factor << '\n';
  out << "image_size = " << render.image_size << '\n';
  out << "focal = " << render.focal << '\n';
  out << "principal_u = " << render.principal_u << '\n';
  out << "principal_v = " << render.principal_v << '\n';
  out << "output_size = " << render.output_size << '\n';
  out << "hpr_gamma = " << render.hpr_gamma << '\n';
  out << "\n[gpc]\n";
  out << "tol = " << gpc.tol << '\n';
  out << "max_sweeps = " << gpc.max_sweeps << '\n';
  out << "restarts = " << gpc.restarts << '\n';
  out << "\n[propagation]\n";
  out << "tau = " << propagation.tau << '\n';
  out << "conflict_policy = "
      << (propagation.conflict_policy == ConflictPolicy::Abandon
              ? "abandon"
              : "highest-confidence")
      << '\n';
  out << "\n[training]\n";
  out << "eta = " << training.eta << '\n';
  out << "epochs = " << training.epochs << '\n';
  out << "learning_rate = " << training.learning_rate << '\n';
  out << "batch_size = " << training.batch_size << '\n';
  return out.str();
}

std::string PipelineConfig::config_hash() const {
  const std::string text = serialize();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace wsrd
