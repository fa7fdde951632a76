#pragma once

#include <optional>
#include <string>
#include <vector>

#include "motionlab/posture.hpp"

namespace motionlab {

/// Tree over landmark indices. Edges are (child, parent); every non-root
/// landmark has exactly one parent.
struct Hierarchy {
  int n = 0;
  int root = 0;
  std::vector<std::pair<int, int>> edges;

  /// Throws SchemaError unless the edges form a tree on n nodes rooted at root.
  void validate() const;

  /// Children sorted by index; the bone order used for postures.
  std::vector<int> ordered_children() const;

  /// Chain 0-1-2-...-(n-1) rooted at 0.
  static Hierarchy chain(int n);
};

struct SkeletonFrame {
  double t = 0.0;                           // seconds
  Eigen::Matrix<double, Eigen::Dynamic, 3> coords;  // n x 3, arbitrary units
};

struct SkeletonSequence {
  Hierarchy hierarchy;
  std::vector<SkeletonFrame> frames;
  std::optional<std::string> label;
};

/// Unit bone directions child - parent, ordered by child index, root excluded.
Posture skeleton_to_posture(const SkeletonFrame& frame, const Hierarchy& h,
                            double eps_bone = 1e-8);

/// Rebuild landmark coordinates from a posture given bone lengths (ordered as
/// the posture parts) and a root position.
SkeletonFrame posture_to_skeleton(const Posture& p, const Hierarchy& h,
                                  const std::vector<double>& bone_lengths, const Vec3& root_pos,
                                  double t = 0.0);

SkeletonSequence load_sequence(const std::string& path);
void save_sequence(const SkeletonSequence& seq, const std::string& path);

/// Canonical JSON form: fixed key order, floats at 17 significant digits.
std::string sequence_to_canonical_json(const SkeletonSequence& seq);
SkeletonSequence sequence_from_json(const std::string& text, const std::string& origin = "<memory>");

}  // namespace motionlab
