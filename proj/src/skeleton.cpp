#include "motionlab/skeleton.hpp"

#include <algorithm>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "motionlab/io_util.hpp"

namespace motionlab {

void Hierarchy::validate() const {
  if (n < 2) throw SchemaError("hierarchy: need at least 2 landmarks");
  if (root < 0 || root >= n) throw SchemaError("hierarchy: root index out of range");
  if (static_cast<int>(edges.size()) != n - 1)
    throw SchemaError("hierarchy: expected " + std::to_string(n - 1) + " edges, got " +
                      std::to_string(edges.size()));
  std::vector<int> parent(n, -1);
  for (const auto& [c, p] : edges) {
    if (c < 0 || c >= n || p < 0 || p >= n) throw SchemaError("hierarchy: edge index out of range");
    if (c == root) throw SchemaError("hierarchy: root cannot have a parent");
    if (c == p) throw SchemaError("hierarchy: self-loop at landmark " + std::to_string(c));
    if (parent[c] != -1) throw SchemaError("hierarchy: duplicate parent for landmark " + std::to_string(c));
    parent[c] = p;
  }
  // every non-root node must reach the root without cycles
  for (int i = 0; i < n; ++i) {
    if (i == root) continue;
    if (parent[i] == -1) throw SchemaError("hierarchy: landmark " + std::to_string(i) + " has no parent");
    int hops = 0;
    for (int v = i; v != root; v = parent[v]) {
      if (++hops > n) throw SchemaError("hierarchy: cycle involving landmark " + std::to_string(i));
    }
  }
}

std::vector<int> Hierarchy::ordered_children() const {
  std::vector<int> children;
  children.reserve(edges.size());
  for (const auto& [c, p] : edges) {
    (void)p;
    children.push_back(c);
  }
  std::sort(children.begin(), children.end());
  return children;
}

Hierarchy Hierarchy::chain(int n) {
  Hierarchy h;
  h.n = n;
  h.root = 0;
  for (int i = 1; i < n; ++i) h.edges.emplace_back(i, i - 1);
  return h;
}

Posture skeleton_to_posture(const SkeletonFrame& frame, const Hierarchy& h, double eps_bone) {
  h.validate();
  if (frame.coords.rows() != h.n)
    throw DimensionMismatch("skeleton_to_posture: frame has " + std::to_string(frame.coords.rows()) +
                            " landmarks, hierarchy expects " + std::to_string(h.n));
  std::vector<int> parent(h.n, -1);
  for (const auto& [c, p] : h.edges) parent[c] = p;

  Posture out;
  out.parts.reserve(h.n - 1);
  int part = 0;
  for (int c : h.ordered_children()) {
    const Vec3 bone = frame.coords.row(c).transpose() - frame.coords.row(parent[c]).transpose();
    if (bone.norm() <= eps_bone)
      throw ZeroBoneError(part, "skeleton_to_posture: degenerate bone at part " +
                                    std::to_string(part) + " (landmark " + std::to_string(c) + ")");
    out.parts.emplace_back(bone);
    ++part;
  }
  return out;
}

SkeletonFrame posture_to_skeleton(const Posture& p, const Hierarchy& h,
                                  const std::vector<double>& bone_lengths, const Vec3& root_pos,
                                  double t) {
  h.validate();
  if (p.size() != h.n - 1)
    throw DimensionMismatch("posture_to_skeleton: posture has " + std::to_string(p.size()) +
                            " parts, hierarchy expects " + std::to_string(h.n - 1));
  if (static_cast<int>(bone_lengths.size()) != p.size())
    throw DimensionMismatch("posture_to_skeleton: bone length count mismatch");
  for (double len : bone_lengths)
    if (!(len > 0.0)) throw DataError("posture_to_skeleton: bone lengths must be positive");

  const std::vector<int> children = h.ordered_children();
  std::vector<int> part_of(h.n, -1);
  for (std::size_t i = 0; i < children.size(); ++i) part_of[children[i]] = static_cast<int>(i);
  std::vector<int> parent(h.n, -1);
  std::vector<std::vector<int>> kids(h.n);
  for (const auto& [c, pr] : h.edges) {
    parent[c] = pr;
    kids[pr].push_back(c);
  }

  SkeletonFrame frame;
  frame.t = t;
  frame.coords.resize(h.n, 3);
  frame.coords.row(h.root) = root_pos.transpose();
  std::queue<int> q;
  q.push(h.root);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int c : kids[v]) {
      const int i = part_of[c];
      frame.coords.row(c) =
          frame.coords.row(v) + (bone_lengths[i] * p.parts[i].vec()).transpose();
      q.push(c);
    }
  }
  return frame;
}

namespace {

using nlohmann::json;

void check_frames(const SkeletonSequence& seq) {
  if (seq.frames.size() < 2) throw SchemaError("sequence: need at least 2 frames");
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    if (f.t < 0.0 || !std::isfinite(f.t)) throw SchemaError("sequence: bad frame time");
    if (!f.coords.allFinite()) throw SchemaError("sequence: non-finite coordinate");
    if (f.coords.rows() != seq.hierarchy.n)
      throw SchemaError("sequence: frame landmark count mismatch");
    if (i > 0 && !(f.t > seq.frames[i - 1].t))
      throw SchemaError("sequence: frame times must be strictly increasing");
  }
}

}  // namespace

std::string sequence_to_canonical_json(const SkeletonSequence& seq) {
  seq.hierarchy.validate();
  check_frames(seq);
  std::ostringstream out;
  out << "{\"n\": " << seq.hierarchy.n << ", \"root\": " << seq.hierarchy.root << ", \"edges\": [";
  for (std::size_t i = 0; i < seq.hierarchy.edges.size(); ++i) {
    if (i) out << ", ";
    out << "[" << seq.hierarchy.edges[i].first << ", " << seq.hierarchy.edges[i].second << "]";
  }
  out << "], \"label\": ";
  if (seq.label)
    out << json(*seq.label).dump();
  else
    out << "null";
  out << ", \"frames\": [";
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    if (i) out << ", ";
    out << "{\"t\": " << format_double(f.t) << ", \"coords\": [";
    for (int r = 0; r < f.coords.rows(); ++r) {
      if (r) out << ", ";
      out << "[" << format_double(f.coords(r, 0)) << ", " << format_double(f.coords(r, 1)) << ", "
          << format_double(f.coords(r, 2)) << "]";
    }
    out << "]}";
  }
  out << "]}\n";
  return out.str();
}

SkeletonSequence sequence_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  try {
    SkeletonSequence seq;
    seq.hierarchy.n = j.at("n").get<int>();
    seq.hierarchy.root = j.at("root").get<int>();
    for (const auto& e : j.at("edges"))
      seq.hierarchy.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    if (j.contains("label") && !j.at("label").is_null())
      seq.label = j.at("label").get<std::string>();
    for (const auto& jf : j.at("frames")) {
      SkeletonFrame f;
      f.t = jf.at("t").get<double>();
      const auto& rows = jf.at("coords");
      f.coords.resize(static_cast<Eigen::Index>(rows.size()), 3);
      Eigen::Index r = 0;
      for (const auto& row : rows) {
        if (row.size() != 3) throw SchemaError(origin + ": coordinate row must have 3 entries");
        for (int k = 0; k < 3; ++k) f.coords(r, k) = row.at(k).get<double>();
        ++r;
      }
      seq.frames.push_back(std::move(f));
    }
    seq.hierarchy.validate();
    check_frames(seq);
    return seq;
  } catch (const json::exception& e) {
    throw SchemaError(origin + ": " + e.what());
  }
}

SkeletonSequence load_sequence(const std::string& path) {
  return sequence_from_json(read_text_file(path), path);
}

void save_sequence(const SkeletonSequence& seq, const std::string& path) {
  write_text_file(path, sequence_to_canonical_json(seq));
}

}  // namespace motionlab
