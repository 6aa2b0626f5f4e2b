#include "cagetrack/io.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cagetrack/errors.hpp"

namespace cagetrack::io {

using nlohmann::json;

namespace {

bool skippable(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

json parse_object(std::string_view line, std::size_t line_no) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw ParseError(line_no, "not valid JSON");
  if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
  return j;
}

const json& field(const json& j, const char* name, std::size_t line_no) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(line_no, std::string("missing field '") + name + "'");
  return *it;
}

std::int64_t as_int(const json& v, const char* name, std::size_t line_no) {
  if (!v.is_number_integer()) throw ParseError(line_no, std::string("field '") + name + "' must be an integer");
  return v.get<std::int64_t>();
}

double as_double(const json& v, const char* name, std::size_t line_no) {
  if (!v.is_number()) throw ParseError(line_no, std::string("field '") + name + "' must be a number");
  return v.get<double>();
}

std::vector<double> as_doubles(const json& v, const char* name, std::size_t line_no) {
  if (!v.is_array()) throw ParseError(line_no, std::string("field '") + name + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(as_double(x, name, line_no));
  return out;
}

BBox as_box(const json& v, std::size_t line_no) {
  const auto b = as_doubles(v, "box", line_no);
  if (b.size() != 4) throw ParseError(line_no, "field 'box' must have 4 entries");
  return {b[0], b[1], b[2], b[3]};
}

TagScores as_tags(const json& v, std::size_t line_no) {
  const auto t = as_doubles(v, "tags", line_no);
  if (t.size() != kNumTagClasses) throw ParseError(line_no, "field 'tags' must have 5 entries");
  TagScores s{};
  std::copy(t.begin(), t.end(), s.begin());
  return s;
}

json box_json(const BBox& b) { return json::array({b.x, b.y, b.w, b.h}); }

json tags_json(const TagScores& s) { return json(std::vector<double>(s.begin(), s.end())); }

}  // namespace

Detection parse_detection(std::string_view line, std::size_t line_no, std::size_t embedding_dim) {
  const json j = parse_object(line, line_no);
  Detection d;
  d.frame = as_int(field(j, "frame", line_no), "frame", line_no);
  d.box = as_box(field(j, "box", line_no), line_no);
  d.confidence = as_double(field(j, "conf", line_no), "conf", line_no);
  d.embedding = as_doubles(field(j, "emb", line_no), "emb", line_no);
  d.tag_scores = as_tags(field(j, "tags", line_no), line_no);
  if (auto err = validate_detection(d, embedding_dim)) {
    throw ParseError(line_no, "invalid detection: " + std::string(to_string(*err)));
  }
  return d;
}

std::string format_detection(const Detection& d) {
  json j;
  j["frame"] = d.frame;
  j["box"] = box_json(d.box);
  j["conf"] = d.confidence;
  j["emb"] = d.embedding;
  j["tags"] = tags_json(d.tag_scores);
  return j.dump();
}

IdentifiedTracklet parse_tracklet(std::string_view line, std::size_t line_no) {
  const json j = parse_object(line, line_no);
  IdentifiedTracklet it;
  const TrackId id = as_int(field(j, "tracklet_id", line_no), "tracklet_id", line_no);
  const json& ident = field(j, "identity", line_no);
  if (!ident.is_null()) {
    if (!ident.is_string()) throw ParseError(line_no, "field 'identity' must be a string or null");
    const auto cls = tag_class_from_string(ident.get<std::string>());
    if (!cls || !is_identity_bearing(*cls)) throw ParseError(line_no, "unknown identity '" + ident.get<std::string>() + "'");
    it.identity = Identity{*cls};
  }
  const FrameIndex start = as_int(field(j, "start", line_no), "start", line_no);
  const FrameIndex end = as_int(field(j, "end", line_no), "end", line_no);
  const json& obs = field(j, "obs", line_no);
  if (!obs.is_array() || obs.empty()) throw ParseError(line_no, "field 'obs' must be a non-empty array");
  std::vector<Observation> observations;
  observations.reserve(obs.size());
  for (const auto& o : obs) {
    if (!o.is_object()) throw ParseError(line_no, "observations must be objects");
    Observation ob;
    ob.frame = as_int(field(o, "frame", line_no), "frame", line_no);
    ob.box = as_box(field(o, "box", line_no), line_no);
    ob.tag_scores = as_tags(field(o, "tags", line_no), line_no);
    if (auto c = o.find("conf"); c != o.end()) ob.confidence = as_double(*c, "conf", line_no);
    if (!is_valid(ob.box)) throw ParseError(line_no, "observation box is degenerate");
    observations.push_back(ob);
  }
  try {
    it.tracklet = Tracklet::from_observations(id, std::move(observations));
  } catch (const ContractError& e) {
    throw ParseError(line_no, e.what());
  }
  if (it.tracklet.start_frame != start || it.tracklet.end_frame != end) {
    throw ParseError(line_no, "start/end disagree with the observation frames");
  }
  return it;
}

std::string format_tracklet(const Tracklet& t, const std::optional<Identity>& identity) {
  json j;
  j["tracklet_id"] = t.id;
  j["identity"] = identity ? json(std::string(to_string(identity->label))) : json(nullptr);
  j["start"] = t.start_frame;
  j["end"] = t.end_frame;
  json obs = json::array();
  for (const auto& o : t.observations) {
    json jo;
    jo["frame"] = o.frame;
    jo["box"] = box_json(o.box);
    jo["tags"] = tags_json(o.tag_scores);
    jo["conf"] = o.confidence;
    obs.push_back(std::move(jo));
  }
  j["obs"] = std::move(obs);
  return j.dump();
}

std::string format_gt_box(FrameIndex frame, const GtBox& g) {
  json j;
  j["frame"] = frame;
  j["gt_id"] = g.gt_id;
  j["identity"] = std::string(to_string(g.identity));
  j["box"] = box_json(g.box);
  return j.dump();
}

std::optional<Detection> DetectionReader::read_one() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (skippable(line)) continue;
    Detection d = parse_detection(line, line_no_, dim_);
    if (last_frame_ && d.frame < *last_frame_) {
      throw ParseError(line_no_, "frame " + std::to_string(d.frame) + " goes backwards");
    }
    last_frame_ = d.frame;
    return d;
  }
  return std::nullopt;
}

std::optional<std::vector<Detection>> DetectionReader::next_frame() {
  if (!pending_) pending_ = read_one();
  if (!pending_) return std::nullopt;
  std::vector<Detection> batch;
  const FrameIndex f = pending_->frame;
  batch.push_back(std::move(*pending_));
  pending_.reset();
  while (auto d = read_one()) {
    if (d->frame != f) {
      pending_ = std::move(d);
      break;
    }
    batch.push_back(std::move(*d));
  }
  return batch;
}

std::vector<Detection> read_detections(std::istream& in, std::size_t embedding_dim) {
  DetectionReader reader(in, embedding_dim);
  std::vector<Detection> all;
  while (auto batch = reader.next_frame()) {
    for (auto& d : *batch) all.push_back(std::move(d));
  }
  return all;
}

void write_detections(std::ostream& out, std::span<const Detection> dets) {
  for (const auto& d : dets) out << format_detection(d) << '\n';
}

std::vector<IdentifiedTracklet> read_tracklets(std::istream& in) {
  std::vector<IdentifiedTracklet> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    out.push_back(parse_tracklet(line, line_no));
  }
  return out;
}

void write_tracklets(std::ostream& out, std::span<const IdentifiedTracklet> ts) {
  for (const auto& t : ts) out << format_tracklet(t.tracklet, t.identity) << '\n';
}

GroundTruth read_ground_truth(std::istream& in) {
  GroundTruth gt;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const json j = parse_object(line, line_no);
    GtBox g;
    const FrameIndex frame = as_int(field(j, "frame", line_no), "frame", line_no);
    g.gt_id = as_int(field(j, "gt_id", line_no), "gt_id", line_no);
    g.box = as_box(field(j, "box", line_no), line_no);
    if (!is_valid(g.box)) throw ParseError(line_no, "ground-truth box is degenerate");
    const json& ident = field(j, "identity", line_no);
    if (!ident.is_string()) throw ParseError(line_no, "field 'identity' must be a string");
    const auto cls = tag_class_from_string(ident.get<std::string>());
    if (!cls) throw ParseError(line_no, "unknown identity '" + ident.get<std::string>() + "'");
    g.identity = *cls;
    auto& boxes = gt.frames[frame];
    for (const auto& other : boxes) {
      if (other.gt_id == g.gt_id) throw ParseError(line_no, "duplicate gt_id in frame");
    }
    boxes.push_back(g);
  }
  return gt;
}

void write_ground_truth(std::ostream& out, const GroundTruth& gt) {
  for (const auto& [frame, boxes] : gt.frames)
    for (const auto& g : boxes) out << format_gt_box(frame, g) << '\n';
}

std::string format_report_text(const EvalReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "mota = " << r.mota << '\n'
     << "idf1 = " << r.idf1 << '\n'
     << "id_switches = " << r.id_switches << '\n'
     << "switches_per_minute = " << r.switches_per_minute << '\n'
     << "id_accuracy = " << r.id_accuracy << '\n'
     << "minutes = " << r.minutes << '\n'
     << "gt = " << r.gt_count << '\n'
     << "hyp = " << r.hyp_count << '\n'
     << "matches = " << r.matches << '\n'
     << "fp = " << r.false_positives << '\n'
     << "fn = " << r.false_negatives << '\n'
     << "idtp = " << r.idtp << '\n'
     << "idfp = " << r.idfp << '\n'
     << "idfn = " << r.idfn << '\n';
  return os.str();
}

std::string format_report_json(const EvalReport& r) {
  json j;
  j["mota"] = r.mota;
  j["idf1"] = r.idf1;
  j["id_switches"] = r.id_switches;
  j["switches_per_minute"] = r.switches_per_minute;
  j["id_accuracy"] = r.id_accuracy;
  j["minutes"] = r.minutes;
  j["gt"] = r.gt_count;
  j["hyp"] = r.hyp_count;
  j["matches"] = r.matches;
  j["fp"] = r.false_positives;
  j["fn"] = r.false_negatives;
  j["idtp"] = r.idtp;
  j["idfp"] = r.idfp;
  j["idfn"] = r.idfn;
  j["identity_correct"] = r.identity_correct;
  return j.dump(2);
}

}  // namespace cagetrack::io
