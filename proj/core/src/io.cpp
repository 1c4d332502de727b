#include "ictmc/io.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ictmc {

std::string format_double(double x) {
  if (x == 0) x = 0;  // "-0" reads back as integer zero, so emit both signs as "0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

using nlohmann::json;

// Minimal JSON emitter; every double goes through format_double so the
// decimal form round-trips bit-exactly.
class JsonWriter {
 public:
  std::string str() const { return os_.str(); }

  JsonWriter& begin_object() {
    sep();
    os_ << "{";
    depth_.push_back(false);
    return *this;
  }
  JsonWriter& end_object() {
    depth_.pop_back();
    newline();
    os_ << "}";
    return *this;
  }
  JsonWriter& begin_array(bool inline_elems = false) {
    sep();
    os_ << "[";
    depth_.push_back(false);
    inline_ += inline_elems ? 1 : 0;
    inline_mark_.push_back(inline_elems);
    return *this;
  }
  JsonWriter& end_array() {
    const bool was_inline = inline_mark_.back();
    depth_.pop_back();
    inline_mark_.pop_back();
    if (!was_inline) newline();
    os_ << "]";
    inline_ -= was_inline ? 1 : 0;
    return *this;
  }
  JsonWriter& key(const std::string& k) {
    sep();
    quote(k);
    os_ << ": ";
    pending_key_ = true;
    return *this;
  }
  JsonWriter& value(double v) {
    sep();
    os_ << format_double(v);
    return *this;
  }
  JsonWriter& value(long v) {
    sep();
    os_ << v;
    return *this;
  }
  JsonWriter& value(int v) { return value(static_cast<long>(v)); }
  JsonWriter& value(bool v) {
    sep();
    os_ << (v ? "true" : "false");
    return *this;
  }
  JsonWriter& value(const std::string& v) {
    sep();
    quote(v);
    return *this;
  }
  JsonWriter& null() {
    sep();
    os_ << "null";
    return *this;
  }

 private:
  void sep() {
    if (pending_key_) {
      pending_key_ = false;
      return;
    }
    if (depth_.empty()) return;
    if (depth_.back()) os_ << ",";
    depth_.back() = true;
    newline(true);
  }
  void newline(bool space_if_inline = false) {
    if (inline_ > 0) {
      if (space_if_inline && !os_.str().empty() && os_.str().back() == ',') os_ << " ";
      return;
    }
    os_ << "\n" << std::string(2 * depth_.size(), ' ');
  }
  void quote(const std::string& s) {
    os_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': os_ << "\\\""; break;
        case '\\': os_ << "\\\\"; break;
        case '\n': os_ << "\\n"; break;
        case '\t': os_ << "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            os_ << buf;
          } else {
            os_ << c;
          }
      }
    }
    os_ << '"';
  }

  std::ostringstream os_;
  std::vector<bool> depth_;
  std::vector<bool> inline_mark_;
  int inline_ = 0;
  bool pending_key_ = false;
};

void write_vec(JsonWriter& w, const Vec& v) {
  w.begin_array(true);
  for (Eigen::Index i = 0; i < v.size(); ++i) w.value(v(i));
  w.end_array();
}

void write_mat(JsonWriter& w, const Mat& a) {
  w.begin_array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    w.begin_array(true);
    for (Eigen::Index c = 0; c < a.cols(); ++c) w.value(a(r, c));
    w.end_array();
  }
  w.end_array();
}

Mat parse_matrix(const json& j, const std::string& field, bool allow_null) {
  if (!j.is_array() || j.empty())
    throw ParseError("field '" + field + "' must be a non-empty array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  Mat out;
  for (size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array())
      throw ParseError("field '" + field + "' row " + std::to_string(r) + " is not an array");
    if (r == 0) {
      cols = row.size();
      if (cols == 0) throw ParseError("field '" + field + "' has an empty row");
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      throw ParseError("field '" + field + "' row " + std::to_string(r) +
                       " has inconsistent length");
    }
    for (size_t c = 0; c < cols; ++c) {
      const json& cell = row[c];
      if (cell.is_number()) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cell.get<double>();
      } else if (allow_null && cell.is_null()) {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = kNoBound;
      } else if (allow_null && cell.is_string() && cell.get<std::string>() == "-inf") {
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = kNoBound;
      } else {
        throw ParseError("field '" + field + "' row " + std::to_string(r) + " column " +
                         std::to_string(c) + " is not a number");
      }
    }
  }
  return out;
}

}  // namespace

Problem parse_problem(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("problem file must be a JSON object");
  if (!j.contains("states") || !j["states"].is_number_integer())
    throw ParseError("field 'states' (integer) is required");
  const int m = j["states"].get<int>();
  if (m < 1) throw ParseError("'states' must be at least 1");

  const bool gamble_form = j.contains("gambles") || j.contains("lower_bounds");
  const bool interval_form = j.contains("q_lower") || j.contains("q_upper");
  if (gamble_form == interval_form)
    throw ParseError("specify exactly one of {gambles, lower_bounds} or {q_lower, q_upper}");

  Problem p;
  if (gamble_form) {
    if (!j.contains("gambles") || !j.contains("lower_bounds"))
      throw ParseError("gamble form needs both 'gambles' and 'lower_bounds'");
    const Mat f = parse_matrix(j["gambles"], "gambles", false);
    const Mat l = parse_matrix(j["lower_bounds"], "lower_bounds", true);
    if (f.cols() != m) throw ParseError("'gambles' column count must equal 'states'");
    if (l.rows() != f.rows() || l.cols() != f.cols())
      throw ParseError("'lower_bounds' must match the shape of 'gambles'");
    p = with_indicators(f, l);
  } else {
    if (!j.contains("q_lower") || !j.contains("q_upper"))
      throw ParseError("interval form needs both 'q_lower' and 'q_upper'");
    const Mat lo = parse_matrix(j["q_lower"], "q_lower", false);
    const Mat hi = parse_matrix(j["q_upper"], "q_upper", false);
    if (lo.rows() != m || lo.cols() != m || hi.rows() != m || hi.cols() != m)
      throw ParseError("interval matrices must be states x states");
    p = from_intervals(lo, hi);
  }
  if (j.contains("name")) p.name = j["name"].get<std::string>();
  if (j.contains("description")) p.description = j["description"].get<std::string>();
  validate(p);
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string serialize_problem(const Problem& p) {
  JsonWriter w;
  w.begin_object();
  if (!p.name.empty()) w.key("name").value(p.name);
  if (!p.description.empty()) w.key("description").value(p.description);
  w.key("states").value(p.num_states());
  w.key("gambles");
  write_mat(w, p.gambles);
  w.key("lower_bounds");
  w.begin_array();
  for (int i = 0; i < p.num_gambles(); ++i) {
    w.begin_array(true);
    for (int k = 0; k < p.num_states(); ++k) {
      if (p.lower_bounds(i, k) == kNoBound)
        w.null();
      else
        w.value(p.lower_bounds(i, k));
    }
    w.end_array();
  }
  w.end_array();
  w.end_object();
  return w.str() + "\n";
}

std::string serialize_report(const SolveReport& r, const std::string& status) {
  JsonWriter w;
  w.begin_object();
  w.key("status").value(status);
  w.key("method").value(std::string("adaptive"));
  w.key("h_T");
  write_vec(w, r.h_T);
  w.key("max_err").value(r.max_err);
  w.key("step_count").value(static_cast<long>(r.steps.size()));
  w.key("lp_calls").value(r.lp_calls);
  w.key("wall_seconds").value(r.wall_seconds);
  w.key("steps");
  w.begin_array();
  for (const StepCertificate& s : r.steps) {
    w.begin_object();
    w.key("t_start").value(s.t_start);
    w.key("dt").value(s.dt);
    w.key("epsilon").value(s.epsilon);
    w.key("step_error").value(s.step_error);
    w.key("exact").value(s.exact);
    w.key("r_used").value(s.r_used);
    w.key("halvings").value(s.halvings);
    w.key("Q");
    write_mat(w, s.Q);
    w.end_object();
  }
  w.end_array();
  w.key("notes");
  w.begin_array(true);
  for (const std::string& n : r.notes) w.value(n);
  w.end_array();
  if (std::isfinite(r.debug_min_coeff)) {
    w.key("debug_min_coeff").value(r.debug_min_coeff);
    w.key("debug_max_operator_gap").value(r.debug_max_operator_gap);
  }
  w.end_object();
  return w.str() + "\n";
}

std::string serialize_report(const GridReport& r, const std::string& status) {
  JsonWriter w;
  w.begin_object();
  w.key("status").value(status);
  w.key("method").value("uniform-" + r.variant);
  w.key("h_T");
  write_vec(w, r.h_T);
  w.key("n").value(r.n);
  w.key("bound").value(r.bound);
  w.key("lp_calls").value(r.lp_calls);
  w.end_object();
  return w.str() + "\n";
}

std::string serialize_bounds(const TransitionBounds& b, const std::string& status) {
  JsonWriter w;
  w.begin_object();
  w.key("status").value(status);
  w.key("state").value(b.state);
  w.key("T").value(b.T);
  w.key("lower");
  write_vec(w, b.lower);
  w.key("upper");
  write_vec(w, b.upper);
  w.key("lower_err").value(b.lower_err);
  w.key("upper_err").value(b.upper_err);
  w.key("lower_seminorm").value(b.lower_seminorm);
  w.key("upper_seminorm").value(b.upper_seminorm);
  w.key("lower_steps").value(b.lower_steps);
  w.key("upper_steps").value(b.upper_steps);
  w.key("lp_calls").value(b.lp_calls);
  w.key("converged").value(b.converged);
  w.end_object();
  return w.str() + "\n";
}

}  // namespace ictmc
