#include "wbcbf/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wbcbf {

std::string format_double(double v) {
  char buf[40];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double d = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw std::runtime_error("bad numeric field '" + s + "'");
  }
  return d;
}

}  // namespace

void write_per_run_csv(const std::string& path, std::span<const PerRunRow> rows) {
  auto out = open_out(path);
  out << "scenario,controller,seed,success,min_distance_m,steps,filter_active_steps,"
         "solver_fallbacks\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.controller << ',' << r.seed << ','
        << (r.success ? 1 : 0) << ',' << format_double(r.min_distance) << ',' << r.steps
        << ',' << r.filter_active_steps << ',' << r.solver_fallbacks << '\n';
  }
}

void write_campaign_csv(const std::string& path, std::span<const CampaignSummary> rows) {
  auto out = open_out(path);
  out << "scenario,controller,runs,successes,sr_percent,mdp_m\n";
  for (const auto& r : rows) {
    out << r.scenario << ',' << to_string(r.controller) << ',' << r.runs << ','
        << r.successes << ',' << format_double(r.sr_percent) << ','
        << format_double(r.mdp) << '\n';
  }
}

std::vector<CampaignSummary> read_campaign_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty campaign csv");
  std::vector<CampaignSummary> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw std::runtime_error("bad campaign csv row '" + line + "'");
    CampaignSummary s;
    s.scenario = f[0];
    s.controller = f[1] == "wbcvar" ? ControllerKind::WbCvarCbf : ControllerKind::CbfBaseline;
    s.runs = static_cast<int>(parse_double(f[2]));
    s.successes = static_cast<int>(parse_double(f[3]));
    s.sr_percent = parse_double(f[4]);
    s.mdp = f[5] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(f[5]);
    out.push_back(s);
  }
  return out;
}

void write_trajectory_csv(const std::string& path, const RunMetrics& run) {
  auto out = open_out(path);
  out << "t_s,av_x,av_y,av_heading,av_speed,vru_x,vru_y,h_true_m,u_accel,u_steer,"
         "gamma_m,active\n";
  for (const auto& p : run.trajectory) {
    out << format_double(p.t) << ',' << format_double(p.vehicle.pos.x) << ','
        << format_double(p.vehicle.pos.y) << ',' << format_double(p.vehicle.heading) << ','
        << format_double(p.vehicle.speed) << ',' << format_double(p.obstacle.pos.x) << ','
        << format_double(p.obstacle.pos.y) << ',' << format_double(p.h_true) << ','
        << format_double(p.decision.u_safe.accel) << ','
        << format_double(p.decision.u_safe.steer) << ','
        << format_double(p.decision.gamma) << ',' << (p.decision.active ? 1 : 0) << '\n';
  }
}

void write_trajectory_svg(const std::string& path, const RunMetrics& run,
                          const ScenarioConfig& cfg) {
  if (run.trajectory.empty()) throw std::runtime_error("empty trajectory");

  double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
  double min_y = min_x, max_y = -min_x;
  auto grow = [&](const Vec2& p) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  };
  for (const auto& p : run.trajectory) {
    grow(p.vehicle.pos);
    grow(p.obstacle.pos);
  }
  const double pad = std::max(cfg.success_clearance + 1.0, 4.0);
  min_x -= pad; max_x += pad; min_y -= pad; max_y += pad;

  const double width = 800.0, height = 600.0;
  const double scale = std::min(width / (max_x - min_x), height / (max_y - min_y));
  auto sx = [&](double x) { return (x - min_x) * scale; };
  auto sy = [&](double y) { return height - (y - min_y) * scale; };  // North up

  std::size_t min_idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
    const auto& p = run.trajectory[i];
    const double d = (p.vehicle.pos - p.obstacle.pos).norm();
    if (d < best) {
      best = d;
      min_idx = i;
    }
  }

  auto out = open_out(path);
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  auto polyline = [&](auto pick, const char* color) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : run.trajectory) {
      const Vec2 q = pick(p);
      out << sx(q.x) << ',' << sy(q.y) << ' ';
    }
    out << "\"/>\n";
  };
  polyline([](const TrajectoryPoint& p) { return p.vehicle.pos; }, "#1f6fb2");
  polyline([](const TrajectoryPoint& p) { return p.obstacle.pos; }, "#c03a2b");

  const auto& m = run.trajectory[min_idx];
  out << "<circle cx=\"" << sx(m.obstacle.pos.x) << "\" cy=\"" << sy(m.obstacle.pos.y)
      << "\" r=\"" << cfg.success_clearance * scale
      << "\" fill=\"none\" stroke=\"#c03a2b\" stroke-dasharray=\"6 4\"/>\n";
  out << "<circle cx=\"" << sx(m.vehicle.pos.x) << "\" cy=\"" << sy(m.vehicle.pos.y)
      << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
  out << "<text x=\"10\" y=\"20\" font-family=\"monospace\" font-size=\"14\">" << cfg.name
      << " seed " << run.seed << "  min distance " << std::setprecision(3)
      << run.min_distance << " m</text>\n";
  out << "</svg>\n";
}

std::string format_summary_table(std::span<const CampaignSummary> rows) {
  std::ostringstream os;
  os << "scenario    controller   runs   SR (%)   MDP (m)\n";
  os << "--------    ----------   ----   ------   -------\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(12) << r.scenario << std::setw(13)
       << to_string(r.controller) << std::setw(7) << r.runs << std::right << std::setw(6)
       << std::fixed << std::setprecision(1) << r.sr_percent << "   " << std::setw(7)
       << std::setprecision(3) << r.mdp << '\n'
       << std::left;
  }
  return os.str();
}

}  // namespace wbcbf
