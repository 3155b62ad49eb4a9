#include "ghostsweep/pcd_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/SVD>

#include "ghostsweep/log.hpp"

namespace ghostsweep {

static_assert(std::endian::native == std::endian::little,
              "binary PCD support assumes a little-endian host");

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, const std::filesystem::path& path) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    // from_chars rejects "inf"/"-nan" spellings on some libstdc++ versions; fall back.
    char* end = nullptr;
    v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      throw Error(path.string() + ": cannot parse number '" + tok + "'");
    }
  }
  return v;
}

std::size_t parse_size(const std::string& tok, const std::filesystem::path& path) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(path.string() + ": cannot parse integer '" + tok + "'");
  }
  return v;
}

double decode_binary(const char* p, const PcdField& f) {
  switch (f.type) {
    case 'F':
      if (f.size == 4) {
        float v;
        std::memcpy(&v, p, 4);
        return v;
      }
      if (f.size == 8) {
        double v;
        std::memcpy(&v, p, 8);
        return v;
      }
      break;
    case 'U':
      switch (f.size) {
        case 1: return static_cast<std::uint8_t>(*p);
        case 2: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
        case 4: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
        case 8: { std::uint64_t v; std::memcpy(&v, p, 8); return static_cast<double>(v); }
      }
      break;
    case 'I':
      switch (f.size) {
        case 1: return static_cast<std::int8_t>(*p);
        case 2: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
        case 4: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
        case 8: { std::int64_t v; std::memcpy(&v, p, 8); return static_cast<double>(v); }
      }
      break;
  }
  throw Error("unsupported PCD field '" + f.name + "' (TYPE " + f.type + " SIZE " +
              std::to_string(f.size) + ")");
}

Label label_from_code(double value, const DynamicLabelSet& dynamic) {
  if (value == static_cast<double>(kUnlabeledCode)) return Label::Unlabeled;
  const auto code = static_cast<std::int64_t>(value);
  return dynamic.contains(code) ? Label::Dynamic : Label::Static;
}

std::uint32_t code_from_label(Label l) {
  switch (l) {
    case Label::Static: return kStaticCode;
    case Label::Dynamic: return kDynamicCode;
    case Label::Unlabeled: break;
  }
  return kUnlabeledCode;
}

void append_float(std::string& out, float v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

bool DynamicLabelSet::contains(std::int64_t v) const {
  return std::find(values.begin(), values.end(), v) != values.end();
}

DynamicLabelSet DynamicLabelSet::parse(const std::string& text) {
  DynamicLabelSet set;
  set.values.clear();
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    // A leading '-' is a sign, not a range separator.
    const auto dash = item.find('-', 1);
    try {
      if (dash == std::string::npos) {
        set.values.push_back(std::stoll(item));
      } else {
        const auto lo = std::stoll(item.substr(0, dash));
        const auto hi = std::stoll(item.substr(dash + 1));
        if (hi < lo) throw Error("empty label range '" + item + "'");
        for (auto v = lo; v <= hi; ++v) set.values.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw Error("malformed label list '" + text + "'");
    }
  }
  if (set.values.empty()) throw Error("empty dynamic label list");
  return set;
}

const PcdField* PcdHeader::find(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

namespace {

PcdHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  PcdHeader h;
  std::vector<int> sizes, counts;
  std::vector<char> types;
  std::vector<std::string> names;
  bool have_points = false, have_data = false, have_width = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    const std::string key = toks[0];
    toks.erase(toks.begin());
    if (key == "VERSION") {
      h.version = toks.empty() ? "" : toks[0];
    } else if (key == "FIELDS") {
      names = toks;
    } else if (key == "SIZE") {
      for (const auto& t : toks) sizes.push_back(static_cast<int>(parse_size(t, path)));
    } else if (key == "TYPE") {
      for (const auto& t : toks) {
        if (t.size() != 1) throw Error(path.string() + ": bad TYPE entry '" + t + "'");
        types.push_back(t[0]);
      }
    } else if (key == "COUNT") {
      for (const auto& t : toks) counts.push_back(static_cast<int>(parse_size(t, path)));
    } else if (key == "WIDTH") {
      if (toks.size() != 1) throw Error(path.string() + ": malformed WIDTH");
      h.width = parse_size(toks[0], path);
      have_width = true;
    } else if (key == "HEIGHT") {
      if (toks.size() != 1) throw Error(path.string() + ": malformed HEIGHT");
      h.height = parse_size(toks[0], path);
    } else if (key == "VIEWPOINT") {
      std::array<double, 7> vp{};
      bool ok = toks.size() == 7;
      for (std::size_t i = 0; ok && i < 7; ++i) {
        try {
          vp[i] = parse_double(toks[i], path);
        } catch (const Error&) {
          ok = false;
        }
        ok = ok && std::isfinite(vp[i]);
      }
      if (ok) {
        h.viewpoint = vp;
      } else {
        h.viewpoint_malformed = true;
      }
    } else if (key == "POINTS") {
      if (toks.size() != 1) throw Error(path.string() + ": malformed POINTS");
      h.points = parse_size(toks[0], path);
      have_points = true;
    } else if (key == "DATA") {
      const std::string kind = toks.empty() ? "" : toks[0];
      if (kind == "ascii") {
        h.data = PcdFormat::Ascii;
      } else if (kind == "binary") {
        h.data = PcdFormat::Binary;
      } else {
        throw Error(path.string() + ": unsupported DATA '" + kind + "'");
      }
      have_data = true;
      break;
    } else {
      throw Error(path.string() + ": unknown PCD header key '" + key + "'");
    }
  }
  if (!have_data) throw Error(path.string() + ": missing DATA line");
  if (h.version != "0.7" && h.version != ".7") {
    throw Error(path.string() + ": unsupported PCD version '" + h.version + "'");
  }
  if (names.empty()) throw Error(path.string() + ": missing FIELDS");
  if (counts.empty()) counts.assign(names.size(), 1);
  if (sizes.size() != names.size() || types.size() != names.size() ||
      counts.size() != names.size()) {
    throw Error(path.string() + ": FIELDS/SIZE/TYPE/COUNT length mismatch");
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    PcdField f{names[i], sizes[i], types[i], counts[i], offset};
    if (f.count < 1) throw Error(path.string() + ": COUNT must be positive");
    offset += static_cast<std::size_t>(f.size) * static_cast<std::size_t>(f.count);
    h.fields.push_back(std::move(f));
  }
  h.record_size = offset;
  if (!have_points) {
    if (!have_width) throw Error(path.string() + ": missing POINTS and WIDTH");
    h.points = h.width * h.height;
  }
  for (const char* axis : {"x", "y", "z"}) {
    const auto* f = h.find(axis);
    if (!f) throw Error(path.string() + ": missing field '" + axis + "'");
    if (f->type != 'F' || (f->size != 4 && f->size != 8)) {
      throw Error(path.string() + ": field '" + axis + "' must be a float");
    }
  }
  return h;
}

}  // namespace

PcdHeader read_pcd_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_header(in, path);
}

LabeledCloud read_cloud(const std::filesystem::path& path, const ReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  const PcdHeader h = parse_header(in, path);

  const PcdField* fx = h.find("x");
  const PcdField* fy = h.find("y");
  const PcdField* fz = h.find("z");
  const PcdField* flabel = nullptr;
  const PcdField* findex = nullptr;
  if (options.label_field) {
    flabel = h.find(*options.label_field);
    if (!flabel) {
      throw Error(path.string() + ": label field '" + *options.label_field + "' not present");
    }
  }
  if (options.index_field) {
    findex = h.find(*options.index_field);
    if (!findex) {
      throw Error(path.string() + ": index field '" + *options.index_field + "' not present");
    }
  }

  LabeledCloud cloud;
  cloud.source_path = path.string();
  cloud.points.reserve(h.points);

  auto emit = [&](double x, double y, double z, double label, double index) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      ++cloud.dropped;
      return;
    }
    Point p{x, y, z, static_cast<PointIndex>(cloud.points.size()), Label::Unlabeled};
    if (flabel) p.label = label_from_code(label, options.dynamic_labels);
    if (findex) {
      if (!(index >= 0.0) || index > static_cast<double>(std::numeric_limits<PointIndex>::max())) {
        throw Error(path.string() + ": invalid point index value");
      }
      p.index = static_cast<PointIndex>(index);
    }
    cloud.points.push_back(p);
  };

  if (h.data == PcdFormat::Binary) {
    std::vector<char> buf(h.record_size * h.points);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
      throw Error(path.string() + ": truncated binary data");
    }
    for (std::size_t n = 0; n < h.points; ++n) {
      const char* rec = buf.data() + n * h.record_size;
      emit(decode_binary(rec + fx->offset, *fx), decode_binary(rec + fy->offset, *fy),
           decode_binary(rec + fz->offset, *fz), flabel ? decode_binary(rec + flabel->offset, *flabel) : 0.0,
           findex ? decode_binary(rec + findex->offset, *findex) : 0.0);
    }
  } else {
    // Token position of each field's first element within an ASCII record.
    std::vector<std::size_t> token_of(h.fields.size());
    std::size_t tokens = 0;
    for (std::size_t i = 0; i < h.fields.size(); ++i) {
      token_of[i] = tokens;
      tokens += static_cast<std::size_t>(h.fields[i].count);
    }
    auto tok_index = [&](const PcdField* f) { return token_of[static_cast<std::size_t>(f - h.fields.data())]; };
    std::string line;
    std::size_t read = 0;
    while (read < h.points && std::getline(in, line)) {
      auto toks = split_ws(line);
      if (toks.empty()) continue;
      if (toks.size() != tokens) {
        throw Error(path.string() + ": ASCII record " + std::to_string(read) + " has " +
                    std::to_string(toks.size()) + " values, expected " + std::to_string(tokens));
      }
      emit(parse_double(toks[tok_index(fx)], path), parse_double(toks[tok_index(fy)], path),
           parse_double(toks[tok_index(fz)], path),
           flabel ? parse_double(toks[tok_index(flabel)], path) : 0.0,
           findex ? parse_double(toks[tok_index(findex)], path) : 0.0);
      ++read;
    }
    if (read != h.points) throw Error(path.string() + ": truncated ASCII data");
  }
  if (cloud.dropped > 0) {
    log().warn("{}: dropped {} non-finite points", path.string(), cloud.dropped);
  }
  return cloud;
}

void write_points(std::span<const Point> points, const std::filesystem::path& path,
                  const WriteOptions& options) {
  if (points.empty() && !options.allow_empty) throw Error("refusing to write empty cloud to " + path.string());
  const bool labels = options.write_labels.value_or(std::any_of(
      points.begin(), points.end(), [](const Point& p) { return p.label != Label::Unlabeled; }));
  const bool index = options.write_index;

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());

  std::string fields = "x y z", size = "4 4 4", type = "F F F", count = "1 1 1";
  if (index) fields += " index", size += " 4", type += " U", count += " 1";
  if (labels) fields += " label", size += " 4", type += " U", count += " 1";

  std::array<double, 7> vp{0, 0, 0, 1, 0, 0, 0};
  if (options.viewpoint) {
    const Eigen::Quaterniond q(options.viewpoint->linear());
    const Eigen::Vector3d t = options.viewpoint->translation();
    vp = {t.x(), t.y(), t.z(), q.w(), q.x(), q.y(), q.z()};
  }
  std::ostringstream header;
  header.precision(17);
  header << "# .PCD v0.7 - Point Cloud Data file format\n"
         << "VERSION 0.7\n"
         << "FIELDS " << fields << "\n"
         << "SIZE " << size << "\n"
         << "TYPE " << type << "\n"
         << "COUNT " << count << "\n"
         << "WIDTH " << points.size() << "\n"
         << "HEIGHT 1\n"
         << "VIEWPOINT";
  for (double v : vp) header << ' ' << v;
  header << "\nPOINTS " << points.size() << "\n"
         << "DATA " << (options.format == PcdFormat::Binary ? "binary" : "ascii") << "\n";
  out << header.str();

  if (options.format == PcdFormat::Binary) {
    const std::size_t rec = 12 + (index ? 4 : 0) + (labels ? 4 : 0);
    std::vector<char> buf(rec * points.size());
    char* p = buf.data();
    for (const auto& pt : points) {
      const float xyz[3] = {static_cast<float>(pt.x), static_cast<float>(pt.y),
                            static_cast<float>(pt.z)};
      std::memcpy(p, xyz, 12);
      p += 12;
      if (index) {
        std::memcpy(p, &pt.index, 4);
        p += 4;
      }
      if (labels) {
        const std::uint32_t code = code_from_label(pt.label);
        std::memcpy(p, &code, 4);
        p += 4;
      }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  } else {
    // Shortest round-trip float formatting keeps ASCII output lossless.
    std::string text;
    text.reserve(points.size() * 40);
    for (const auto& pt : points) {
      append_float(text, static_cast<float>(pt.x));
      text += ' ';
      append_float(text, static_cast<float>(pt.y));
      text += ' ';
      append_float(text, static_cast<float>(pt.z));
      if (index) {
        text += ' ';
        text += std::to_string(pt.index);
      }
      if (labels) {
        text += ' ';
        text += std::to_string(code_from_label(pt.label));
      }
      text += '\n';
    }
    out << text;
  }
  if (!out) throw Error("failed writing " + path.string());
}

void write_cloud(const LabeledCloud& cloud, const std::filesystem::path& path, PcdFormat format) {
  WriteOptions opts;
  opts.format = format;
  write_points(cloud.points, path, opts);
}

// ---------------------------------------------------------------------------

Eigen::Isometry3d pose_from_row_major(std::span<const double, 12> v) {
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  const Eigen::Vector3d t(v[3], v[7], v[11]);
  if (!r.allFinite() || !t.allFinite()) throw Error("pose contains non-finite values");
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-3 || r.determinant() <= 0.0) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 1e-6) throw Error("pose rotation is degenerate");
    Eigen::Matrix3d fixed = svd.matrixU() * svd.matrixV().transpose();
    if (fixed.determinant() < 0.0) {
      Eigen::Matrix3d u = svd.matrixU();
      u.col(2) *= -1.0;
      fixed = u * svd.matrixV().transpose();
    }
    log().warn("pose rotation off orthonormal by {:.3g}; re-orthonormalized", err);
    r = fixed;
  }
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.linear() = r;
  pose.translation() = t;
  return pose;
}

std::vector<Eigen::Isometry3d> read_pose_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pose file " + path.string());
  std::vector<Eigen::Isometry3d> poses;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 12) {
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 12 values, got " +
                  std::to_string(toks.size()));
    }
    std::array<double, 12> vals{};
    for (std::size_t i = 0; i < 12; ++i) vals[i] = parse_double(toks[i], path);
    poses.push_back(pose_from_row_major(vals));
  }
  return poses;
}

Eigen::Isometry3d viewpoint_pose(const PcdHeader& h) {
  if (h.viewpoint_malformed) throw Error("malformed VIEWPOINT header");
  if (!h.viewpoint) throw Error("PCD has no VIEWPOINT header");
  const auto& vp = *h.viewpoint;
  Eigen::Quaterniond q(vp[3], vp[4], vp[5], vp[6]);
  const double n = q.norm();
  if (n < 1e-9) throw Error("malformed VIEWPOINT: zero quaternion");
  if (std::abs(n - 1.0) > 1e-3) log().warn("VIEWPOINT quaternion norm {:.6f}; normalized", n);
  q.normalize();
  Eigen::Isometry3d pose = Eigen::Isometry3d::Identity();
  pose.linear() = q.toRotationMatrix();
  pose.translation() = Eigen::Vector3d(vp[0], vp[1], vp[2]);
  return pose;
}

ScanFrame read_scan(const std::filesystem::path& path, const Eigen::Isometry3d& pose,
                    bool already_global, std::int64_t sequence_id) {
  LabeledCloud cloud = read_cloud(path);
  ScanFrame scan;
  scan.sequence_id = sequence_id;
  scan.sensor_origin = pose.translation();
  scan.points = std::move(cloud.points);
  if (!already_global) {
    for (auto& p : scan.points) {
      const Eigen::Vector3d g = pose * Eigen::Vector3d(p.x, p.y, p.z);
      p.x = g.x();
      p.y = g.y();
      p.z = g.z();
    }
  }
  return scan;
}

ScanFrame read_scan(const std::filesystem::path& path, const ScanReadOptions& options) {
  Eigen::Isometry3d pose;
  if (options.pose_file) {
    const auto poses = read_pose_file(*options.pose_file);
    const std::size_t row = options.row.value_or(static_cast<std::size_t>(options.sequence_id));
    if (row >= poses.size()) {
      throw Error(options.pose_file->string() + ": no pose for row " + std::to_string(row) +
                  " (file has " + std::to_string(poses.size()) + ")");
    }
    pose = poses[row];
  } else if (options.pose_source == PoseSource::PoseFile) {
    throw Error("pose_source is pose_file but no pose file was given");
  } else {
    pose = viewpoint_pose(read_pcd_header(path));
  }
  return read_scan(path, pose, options.already_global, options.sequence_id);
}

}  // namespace ghostsweep
