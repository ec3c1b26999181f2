#include "ltc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "ltc/cloud_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ltc {

const char* family_name(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::Sphere: return "sphere";
    case ShapeFamily::Cuboid: return "cuboid";
    case ShapeFamily::Cylinder: return "cylinder";
    case ShapeFamily::Table: return "table";
    case ShapeFamily::Chair: return "chair";
  }
  return "?";
}

ShapeFamily family_from_name(const std::string& s) {
  for (ShapeFamily f : all_families())
    if (s == family_name(f)) return f;
  throw Error("unknown shape family: " + s);
}

std::vector<ShapeFamily> all_families() {
  return {ShapeFamily::Sphere, ShapeFamily::Cuboid, ShapeFamily::Cylinder,
          ShapeFamily::Table, ShapeFamily::Chair};
}

PointCloud sample_sphere_surface(double radius, int n_points, Rng& rng) {
  if (radius <= 0.0) throw Error("sample_sphere_surface: degenerate radius");
  Tensor pts = Tensor::zeros({n_points, 3});
  for (int i = 0; i < n_points; ++i) {
    double x, y, z, norm;
    do {
      x = rng.normal();
      y = rng.normal();
      z = rng.normal();
      norm = std::sqrt(x * x + y * y + z * z);
    } while (norm < 1e-12);
    pts.data[3 * i] = radius * x / norm;
    pts.data[3 * i + 1] = radius * y / norm;
    pts.data[3 * i + 2] = radius * z / norm;
  }
  return PointCloud(std::move(pts));
}

PointCloud sample_boxes_surface(const std::vector<Box>& boxes, int n_points, Rng& rng) {
  // One entry per face of every box, weighted by face area.
  struct Face {
    const Box* box;
    int axis;
    double sign;
    double area;
  };
  std::vector<Face> faces;
  double total = 0.0;
  for (const Box& b : boxes) {
    for (int axis = 0; axis < 3; ++axis) {
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      const double area = 4.0 * b.half[u] * b.half[v];
      for (double sign : {-1.0, 1.0}) {
        faces.push_back({&b, axis, sign, area});
        total += area;
      }
    }
  }
  if (total <= 0.0) throw Error("sample_boxes_surface: degenerate (zero area)");

  Tensor pts = Tensor::zeros({n_points, 3});
  for (int i = 0; i < n_points; ++i) {
    double pick = rng.uniform(0.0, total);
    size_t fi = 0;
    for (; fi + 1 < faces.size(); ++fi) {
      if (pick < faces[fi].area) break;
      pick -= faces[fi].area;
    }
    const Face& f = faces[fi];
    const int u = (f.axis + 1) % 3, v = (f.axis + 2) % 3;
    Vec3 p = f.box->center;
    p[f.axis] += f.sign * f.box->half[f.axis];
    p[u] += rng.uniform(-f.box->half[u], f.box->half[u]);
    p[v] += rng.uniform(-f.box->half[v], f.box->half[v]);
    pts.data[3 * i] = p[0];
    pts.data[3 * i + 1] = p[1];
    pts.data[3 * i + 2] = p[2];
  }
  return PointCloud(std::move(pts));
}

PointCloud sample_cylinder_surface(double radius, double half_height, int n_points,
                                   Rng& rng) {
  if (radius <= 0.0 || half_height <= 0.0)
    throw Error("sample_cylinder_surface: degenerate parameters");
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double lateral = two_pi * radius * 2.0 * half_height;
  const double cap = two_pi * 0.5 * radius * radius;  // pi r^2
  const double total = lateral + 2.0 * cap;
  Tensor pts = Tensor::zeros({n_points, 3});
  for (int i = 0; i < n_points; ++i) {
    const double pick = rng.uniform(0.0, total);
    const double theta = rng.uniform(0.0, two_pi);
    double x, y, z;
    if (pick < lateral) {
      x = radius * std::cos(theta);
      y = radius * std::sin(theta);
      z = rng.uniform(-half_height, half_height);
    } else {
      const double r = radius * std::sqrt(rng.uniform_unit());
      x = r * std::cos(theta);
      y = r * std::sin(theta);
      z = pick < lateral + cap ? half_height : -half_height;
    }
    pts.data[3 * i] = x;
    pts.data[3 * i + 1] = y;
    pts.data[3 * i + 2] = z;
  }
  return PointCloud(std::move(pts));
}

// Table: a top slab on four corner legs spanning the full unit-cube height.
static std::vector<Box> table_boxes(Rng& rng) {
  const double tx = rng.uniform(0.3, 0.5);
  const double ty = rng.uniform(0.3, 0.5);
  const double tt = rng.uniform(0.01, 0.03);   // top half thickness
  const double lt = rng.uniform(0.012, 0.025); // leg half thickness
  std::vector<Box> boxes;
  boxes.push_back({{0.0, 0.0, 0.5 - tt}, {tx, ty, tt}});
  const double leg_half = (1.0 - 2.0 * tt) / 2.0;
  const double leg_z = 0.5 - 2.0 * tt - leg_half;
  for (double sx : {-1.0, 1.0})
    for (double sy : {-1.0, 1.0})
      boxes.push_back({{sx * (tx - lt), sy * (ty - lt), leg_z}, {lt, lt, leg_half}});
  return boxes;
}

// Chair: seat slab at mid height, backrest above one edge, four legs below.
static std::vector<Box> chair_boxes(Rng& rng) {
  const double sx = rng.uniform(0.2, 0.35);
  const double sy = rng.uniform(0.2, 0.35);
  const double st = rng.uniform(0.01, 0.03);   // seat half thickness
  const double lt = rng.uniform(0.012, 0.025); // leg half thickness
  const double bt = rng.uniform(0.01, 0.025);  // backrest half thickness
  std::vector<Box> boxes;
  boxes.push_back({{0.0, 0.0, 0.0}, {sx, sy, st}});
  const double leg_half = (0.5 - st) / 2.0;
  const double leg_z = -st - leg_half;
  for (double px : {-1.0, 1.0})
    for (double py : {-1.0, 1.0})
      boxes.push_back({{px * (sx - lt), py * (sy - lt), leg_z}, {lt, lt, leg_half}});
  const double back_half = (0.5 - st) / 2.0;
  boxes.push_back({{0.0, sy - bt, st + back_half}, {sx, bt, back_half}});
  return boxes;
}

PointCloud sample_complete(const ShapeSpec& spec, int n_points) {
  if (n_points < 1) throw Error("sample_complete: n_points must be >= 1");
  Rng rng(mix_seed(spec.seed, 0x73686170));
  switch (spec.family) {
    case ShapeFamily::Sphere:
      return sample_sphere_surface(rng.uniform(0.25, 0.5), n_points, rng);
    case ShapeFamily::Cuboid: {
      Box b{{0.0, 0.0, 0.0},
            {rng.uniform(0.15, 0.5), rng.uniform(0.15, 0.5), rng.uniform(0.15, 0.5)}};
      return sample_boxes_surface({b}, n_points, rng);
    }
    case ShapeFamily::Cylinder:
      return sample_cylinder_surface(rng.uniform(0.1, 0.4), rng.uniform(0.15, 0.5),
                                     n_points, rng);
    case ShapeFamily::Table:
      return sample_boxes_surface(table_boxes(rng), n_points, rng);
    case ShapeFamily::Chair:
      return sample_boxes_surface(chair_boxes(rng), n_points, rng);
  }
  throw Error("sample_complete: unknown family");
}

const std::vector<Vec3>& view_directions() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d;
    const double s = 1.0 / std::sqrt(3.0);
    for (double x : {-1.0, 1.0})
      for (double y : {-1.0, 1.0})
        for (double z : {-1.0, 1.0}) d.push_back({x * s, y * s, z * s});
    return d;
  }();
  return dirs;
}

std::vector<int> half_space_keep_indices(const PointCloud& cloud, const Vec3& view_dir,
                                         double keep_fraction) {
  if (keep_fraction <= 0.0 || keep_fraction >= 1.0)
    throw Error("half_space_keep_indices: keep_fraction must be in (0, 1)");
  const int n = cloud.size();
  Vec3 centroid{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    centroid[0] += cloud.x(i);
    centroid[1] += cloud.y(i);
    centroid[2] += cloud.z(i);
  }
  for (double& c : centroid) c /= n;

  std::vector<std::pair<double, int>> keyed(n);
  for (int i = 0; i < n; ++i) {
    const double key = (cloud.x(i) - centroid[0]) * view_dir[0] +
                       (cloud.y(i) - centroid[1]) * view_dir[1] +
                       (cloud.z(i) - centroid[2]) * view_dir[2];
    keyed[i] = {key, i};
  }
  std::sort(keyed.begin(), keyed.end());
  const int k = std::clamp(static_cast<int>(std::lround(keep_fraction * n)), 1, n - 1);
  std::vector<int> keep(k);
  for (int i = 0; i < k; ++i) keep[i] = keyed[i].second;
  std::sort(keep.begin(), keep.end());
  return keep;
}

PointCloud crop_half_space(const PointCloud& cloud, const Vec3& view_dir,
                           double keep_fraction) {
  const auto keep = half_space_keep_indices(cloud, view_dir, keep_fraction);
  Tensor pts = Tensor::zeros({static_cast<int>(keep.size()), 3});
  for (size_t i = 0; i < keep.size(); ++i) {
    pts.data[3 * i] = cloud.x(keep[i]);
    pts.data[3 * i + 1] = cloud.y(keep[i]);
    pts.data[3 * i + 2] = cloud.z(keep[i]);
  }
  return PointCloud(std::move(pts));
}

PointCloud resample_to_count(const PointCloud& cloud, int n_points, Rng& rng) {
  const int k = cloud.size();
  if (k > n_points)
    throw Error("resample_to_count: cloud already larger than target count");
  Tensor pts = Tensor::zeros({n_points, 3});
  std::copy(cloud.points.data.begin(), cloud.points.data.end(), pts.data.begin());
  // duplicated fill points get a tiny jitter, clamped so clouds whose
  // surface touches the unit-cube boundary stay inside it
  auto jittered = [&rng](double v) {
    return std::clamp(v + rng.uniform(-1e-6, 1e-6), -0.5, 0.5);
  };
  for (int i = k; i < n_points; ++i) {
    const int j = static_cast<int>(rng.index(static_cast<size_t>(k)));
    pts.data[3 * i] = jittered(cloud.x(j));
    pts.data[3 * i + 1] = jittered(cloud.y(j));
    pts.data[3 * i + 2] = jittered(cloud.z(j));
  }
  return PointCloud(std::move(pts));
}

PointCloud make_partial(const PointCloud& complete, const Vec3& view_dir,
                        double keep_fraction, Rng& rng) {
  return resample_to_count(crop_half_space(complete, view_dir, keep_fraction),
                           complete.size(), rng);
}

DatasetSplit build_dataset(const DatasetConfig& cfg, uint64_t seed) {
  if (cfg.partial_per_family < 1 || cfg.complete_per_family < 1 ||
      cfg.held_out_per_family < 1)
    throw Error("build_dataset: per-family counts must be >= 1");
  DatasetSplit split;
  split.n_points = cfg.n_points;
  const auto& dirs = view_directions();

  // Pool tags keep instance seeds disjoint between the unpaired pools.
  auto instance_seed = [&](int tag, int family_idx, int i) {
    return mix_seed(mix_seed(seed, static_cast<uint64_t>(tag)),
                    static_cast<uint64_t>(family_idx) * 100003ull + i);
  };

  for (size_t fi = 0; fi < cfg.families.size(); ++fi) {
    const ShapeFamily family = cfg.families[fi];
    for (int i = 0; i < cfg.partial_per_family; ++i) {
      PartialEntry e;
      e.family = family;
      e.instance_seed = instance_seed(1, static_cast<int>(fi), i);
      const PointCloud complete =
          sample_complete({family, e.instance_seed}, cfg.n_points);
      Rng view_rng(mix_seed(e.instance_seed, 0x766965));
      e.view_dir = dirs[i % dirs.size()];
      e.keep_fraction = view_rng.uniform(cfg.keep_fraction_min, cfg.keep_fraction_max);
      e.cloud = make_partial(complete, e.view_dir, e.keep_fraction, view_rng);
      split.partial_set.push_back(std::move(e));
    }
    for (int i = 0; i < cfg.complete_per_family; ++i) {
      CompleteEntry e;
      e.family = family;
      e.instance_seed = instance_seed(2, static_cast<int>(fi), i);
      e.cloud = sample_complete({family, e.instance_seed}, cfg.n_points);
      split.complete_set.push_back(std::move(e));
    }
    for (int i = 0; i < cfg.held_out_per_family; ++i) {
      HeldOutPair e;
      e.family = family;
      e.instance_seed = instance_seed(3, static_cast<int>(fi), i);
      e.complete = sample_complete({family, e.instance_seed}, cfg.n_points);
      Rng view_rng(mix_seed(e.instance_seed, 0x766965));
      e.view_dir = dirs[i % dirs.size()];
      e.keep_fraction = view_rng.uniform(cfg.keep_fraction_min, cfg.keep_fraction_max);
      e.partial = make_partial(e.complete, e.view_dir, e.keep_fraction, view_rng);
      split.held_out.push_back(std::move(e));
    }
  }
  return split;
}

static json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

static Vec3 vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void save_dataset(const DatasetSplit& split, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "partial");
  fs::create_directories(fs::path(dir) / "complete");
  fs::create_directories(fs::path(dir) / "heldout");

  json manifest;
  manifest["version"] = 1;
  manifest["n_points"] = split.n_points;

  json partials = json::array();
  for (size_t i = 0; i < split.partial_set.size(); ++i) {
    const auto& e = split.partial_set[i];
    char name[64];
    std::snprintf(name, sizeof(name), "partial/%s_%04zu.xyz", family_name(e.family), i);
    write_cloud((fs::path(dir) / name).string(), e.cloud);
    partials.push_back({{"path", name},
                        {"family", family_name(e.family)},
                        {"instance_seed", e.instance_seed},
                        {"view_dir", vec3_json(e.view_dir)},
                        {"keep_fraction", e.keep_fraction}});
  }
  manifest["partial"] = std::move(partials);

  json completes = json::array();
  for (size_t i = 0; i < split.complete_set.size(); ++i) {
    const auto& e = split.complete_set[i];
    char name[64];
    std::snprintf(name, sizeof(name), "complete/%s_%04zu.xyz", family_name(e.family), i);
    write_cloud((fs::path(dir) / name).string(), e.cloud);
    completes.push_back({{"path", name},
                         {"family", family_name(e.family)},
                         {"instance_seed", e.instance_seed}});
  }
  manifest["complete"] = std::move(completes);

  json held = json::array();
  for (size_t i = 0; i < split.held_out.size(); ++i) {
    const auto& e = split.held_out[i];
    char pname[64], cname[64];
    std::snprintf(pname, sizeof(pname), "heldout/%s_%04zu_partial.xyz",
                  family_name(e.family), i);
    std::snprintf(cname, sizeof(cname), "heldout/%s_%04zu_complete.xyz",
                  family_name(e.family), i);
    write_cloud((fs::path(dir) / pname).string(), e.partial);
    write_cloud((fs::path(dir) / cname).string(), e.complete);
    held.push_back({{"partial", pname},
                    {"complete", cname},
                    {"family", family_name(e.family)},
                    {"instance_seed", e.instance_seed},
                    {"view_dir", vec3_json(e.view_dir)},
                    {"keep_fraction", e.keep_fraction}});
  }
  manifest["held_out"] = std::move(held);

  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw Error("save_dataset: cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

DatasetSplit load_dataset(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error("load_dataset: cannot open " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("load_dataset: bad manifest " + manifest_path + ": " + e.what());
  }
  const fs::path base = fs::path(manifest_path).parent_path();

  DatasetSplit split;
  split.n_points = manifest.at("n_points").get<int>();
  for (const auto& j : manifest.at("partial")) {
    PartialEntry e;
    e.cloud = read_cloud((base / j.at("path").get<std::string>()).string());
    e.family = family_from_name(j.at("family").get<std::string>());
    e.instance_seed = j.at("instance_seed").get<uint64_t>();
    e.view_dir = vec3_from_json(j.at("view_dir"));
    e.keep_fraction = j.at("keep_fraction").get<double>();
    split.partial_set.push_back(std::move(e));
  }
  for (const auto& j : manifest.at("complete")) {
    CompleteEntry e;
    e.cloud = read_cloud((base / j.at("path").get<std::string>()).string());
    e.family = family_from_name(j.at("family").get<std::string>());
    e.instance_seed = j.at("instance_seed").get<uint64_t>();
    split.complete_set.push_back(std::move(e));
  }
  for (const auto& j : manifest.at("held_out")) {
    HeldOutPair e;
    e.partial = read_cloud((base / j.at("partial").get<std::string>()).string());
    e.complete = read_cloud((base / j.at("complete").get<std::string>()).string());
    e.family = family_from_name(j.at("family").get<std::string>());
    e.instance_seed = j.at("instance_seed").get<uint64_t>();
    e.view_dir = vec3_from_json(j.at("view_dir"));
    e.keep_fraction = j.at("keep_fraction").get<double>();
    split.held_out.push_back(std::move(e));
  }
  return split;
}

}  // namespace ltc
