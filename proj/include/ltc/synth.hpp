#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ltc/metrics.hpp"
#include "ltc/rng.hpp"

namespace ltc {

enum class ShapeFamily : uint8_t { Sphere, Cuboid, Cylinder, Table, Chair };

const char* family_name(ShapeFamily f);
ShapeFamily family_from_name(const std::string& s);
std::vector<ShapeFamily> all_families();

// A procedural shape instance: the family plus a seed from which the
// continuous parameters (radii, extents, leg thickness) are drawn. All
// sampled surfaces fit the unit cube centered at the origin.
struct ShapeSpec {
  ShapeFamily family = ShapeFamily::Sphere;
  uint64_t seed = 0;
};

using Vec3 = std::array<double, 3>;

struct Box {
  Vec3 center;
  Vec3 half;  // half extents per axis
};

// Area-uniform surface samplers for the underlying primitives.
PointCloud sample_sphere_surface(double radius, int n_points, Rng& rng);
PointCloud sample_boxes_surface(const std::vector<Box>& boxes, int n_points, Rng& rng);
PointCloud sample_cylinder_surface(double radius, double half_height, int n_points,
                                   Rng& rng);

// n_points drawn area-uniformly from the instance surface; deterministic
// given the spec seed.
PointCloud sample_complete(const ShapeSpec& spec, int n_points);

// The eight cube-corner unit vectors, the fixed set of view directions.
const std::vector<Vec3>& view_directions();

// Indices (ascending) of the keep_fraction of points with lowest
// dot(p - centroid, view_dir); ties broken by index.
std::vector<int> half_space_keep_indices(const PointCloud& cloud, const Vec3& view_dir,
                                         double keep_fraction);

// The kept subset as a cloud; an exact subset of the input support.
PointCloud crop_half_space(const PointCloud& cloud, const Vec3& view_dir,
                           double keep_fraction);

// Pads a cloud back to n points by duplicating random kept points with a
// tiny (1e-6) jitter, keeping tensor shapes fixed.
PointCloud resample_to_count(const PointCloud& cloud, int n_points, Rng& rng);

// Half-space occlusion: crop then resample to the fixed point count.
PointCloud make_partial(const PointCloud& complete, const Vec3& view_dir,
                        double keep_fraction, Rng& rng);

struct PartialEntry {
  PointCloud cloud;
  ShapeFamily family;
  uint64_t instance_seed;
  Vec3 view_dir;
  double keep_fraction;
};

struct CompleteEntry {
  PointCloud cloud;
  ShapeFamily family;
  uint64_t instance_seed;
};

// Ground-truth pair, evaluation only; never fed to training.
struct HeldOutPair {
  PointCloud partial;
  PointCloud complete;
  ShapeFamily family;
  uint64_t instance_seed;
  Vec3 view_dir;
  double keep_fraction;
};

struct DatasetConfig {
  std::vector<ShapeFamily> families = all_families();
  int partial_per_family = 15;
  int complete_per_family = 15;
  int held_out_per_family = 10;
  int n_points = 256;
  double keep_fraction_min = 0.4;
  double keep_fraction_max = 0.6;
  uint64_t seed = 0;
};

// The two training pools come from disjoint shape instances (unpaired);
// held-out pairs use a third instance pool.
struct DatasetSplit {
  std::vector<PartialEntry> partial_set;
  std::vector<CompleteEntry> complete_set;
  std::vector<HeldOutPair> held_out;
  int n_points = 0;
};

DatasetSplit build_dataset(const DatasetConfig& cfg, uint64_t seed);

// manifest.json plus per-cloud .xyz files under dir.
void save_dataset(const DatasetSplit& split, const std::string& dir);
DatasetSplit load_dataset(const std::string& manifest_path);

}  // namespace ltc
