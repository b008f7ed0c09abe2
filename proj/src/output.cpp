#include "ncps/output.hpp"

#include "ncps/config.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

namespace ncps {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json moments_json(const std::vector<Moments>& series) {
  json mean = json::array(), sd = json::array(), se = json::array();
  for (const Moments& m : series) {
    mean.push_back(number(m.mean));
    sd.push_back(number(m.std));
    se.push_back(number(m.stderr_));
  }
  return {{"mean", mean}, {"std", sd}, {"stderr", se}};
}

json witness_json(const Witness& w) {
  json pt = json::array();
  for (double v : w.point) pt.push_back(number(v));
  return {{"condition", to_string(w.id)}, {"indices", w.indices}, {"point", pt},
          {"constant", number(w.constant)}, {"violation", number(w.violation)}, {"description", w.description}};
}

}  // namespace

TrajectoryCsv::TrajectoryCsv(std::ostream& out, const std::string& echo, int p) : out_(out), p_(p) {
  std::istringstream lines(echo);
  std::string line;
  while (std::getline(lines, line)) out_ << "# " << line << '\n';
  out_ << 't';
  for (int i = 1; i <= p_; ++i) out_ << ",x" << i;
  out_ << ",minGap,VN\n";
}

void TrajectoryCsv::row(double t, const ChamberPoint& x) {
  out_ << format_double(t);
  for (Index i = 0; i < x.size(); ++i) out_ << ',' << format_double(x[i]);
  // p = 1 has no gap; the empty product N is 1.
  out_ << ',' << (x.size() >= 2 ? format_double(x.min_gap()) : std::string("inf")) << ','
       << format_double(vandermonde_squared(x)) << '\n';
}

void write_trajectory_csv(std::ostream& out, const std::string& echo, const Trajectory& traj) {
  const int p = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  TrajectoryCsv csv(out, echo, p);
  for (std::size_t k = 0; k < traj.states.size(); ++k) csv.row(traj.times[k], traj.states[k]);
}

std::string trajectory_json(const Trajectory& traj, const std::string& echo) {
  json j;
  j["config_echo"] = echo;
  j["p"] = traj.states.empty() ? 0 : traj.states.front().size();
  j["t"] = traj.times;
  json x = json::array(), gap = json::array(), vn = json::array();
  for (const ChamberPoint& st : traj.states) {
    x.push_back(std::vector<double>(st.coords().data(), st.coords().data() + st.size()));
    gap.push_back(number(st.min_gap()));
    vn.push_back(number(vandermonde_squared(st)));
  }
  j["x"] = x;
  j["minGap"] = gap;
  j["VN"] = vn;
  json ev = json::object();
  for (std::size_t k = 0; k < kEventKinds; ++k) ev[to_string(static_cast<EventKind>(k))] = traj.event_counts.counts[k];
  j["events"] = ev;
  return j.dump(2) + "\n";
}

std::string ensemble_json(const EnsembleStats& s, const std::string& echo) {
  json j;
  j["config_echo"] = echo;
  j["p"] = s.p;
  j["n_paths"] = s.n_paths;
  j["t"] = s.times;
  json x = json::array();
  for (int i = 0; i < s.p; ++i) {
    std::vector<Moments> col;
    col.reserve(s.x.size());
    for (const auto& row : s.x) col.push_back(row[static_cast<std::size_t>(i)]);
    x.push_back(moments_json(col));
  }
  j["x"] = x;
  j["e1"] = moments_json(s.e1);
  j["R"] = moments_json(s.R);
  j["minGap"] = moments_json(s.min_gap);
  j["VN"] = moments_json(s.VN);
  json mins = json::array();
  for (double v : s.min_gap_min) mins.push_back(number(v));
  j["minGap_min"] = mins;
  j["positive_gap_fraction"] = s.positive_gap_fraction;
  json ev;
  for (std::size_t k = 0; k < kEventKinds; ++k) ev[to_string(static_cast<EventKind>(k))] = s.events.counts[k];
  j["events"] = ev;
  j["paths_with_clamp"] = s.paths_with_clamp;
  return j.dump(2) + "\n";
}

std::string report_json(const ConditionReport& r) {
  json j;
  j["overall"] = to_string(r.overall);
  j["route"] = r.route;
  j["method"] = to_string(r.method());
  j["tol"] = r.tol;
  if (r.conjectured_threshold) j["conjectured_threshold"] = *r.conjectured_threshold;
  json conds = json::object();
  for (const auto& [id, c] : r.conditions) {
    json cj;
    cj["verdict"] = to_string(c.verdict);
    cj["method"] = to_string(c.method);
    cj["constant"] = c.constant ? number(*c.constant) : json(nullptr);
    json ws = json::array();
    for (const Witness& w : c.witnesses) ws.push_back(witness_json(w));
    cj["witnesses"] = ws;
    if (!c.note.empty()) cj["note"] = c.note;
    conds[to_string(id)] = cj;
  }
  j["conditions"] = conds;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

}  // namespace ncps
