// Netlist text format: parser and serializer.
//
//   * comment                      + continuation of the previous line
//   M<name> d g s b [W= L= TYPE=N|P VTH= KP= N= LAMBDA= VT=]
//   R<name> n1 n2 <value>          C<name> n1 n2 <value> [IC=<v>]
//   V<name>|I<name> n+ n- <v> | DC <v> | PULSE(...) | PWL(...) | SIN(...)
//   YMEM <name> n+ n- [RON= ROFF= D= MU= X0= P= WINDOW= WIDTH= HEIGHT=]
//   YPD <name> n+ n- IPH=<waveform> [CPD= IS= CLAMP=]
//   .title <name>  .param k=v ...  .tran <dt> <tstop>
//   .dc <src> <start> <stop> <pts> [dec]  .end

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pixsim/error.hpp"
#include "pixsim/netlist.hpp"

namespace pixsim {

namespace {

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
};

bool is_punct(char c) { return c == '(' || c == ')' || c == '='; }

void tokenize_line(std::string_view line, int line_no, int first_col, std::vector<Token>& out) {
  std::size_t i = static_cast<std::size_t>(first_col);
  while (i < line.size()) {
    const char c = line[i];
    if (c == ';') break;
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
      ++i;
      continue;
    }
    if (is_punct(c)) {
      out.push_back({std::string(1, c), line_no, static_cast<int>(i) + 1});
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) && line[i] != ',' &&
           line[i] != ';' && !is_punct(line[i])) {
      ++i;
    }
    out.push_back({std::string(line.substr(start, i - start)), line_no, static_cast<int>(start) + 1});
  }
}

struct Statement {
  std::vector<Token> tokens;
  int line = 0;
  int end_col = 1;  // column just past the last token
};

std::vector<Statement> split_statements(std::string_view text) {
  std::vector<Statement> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = nl + 1;

    std::size_t first = 0;
    while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first]))) ++first;
    if (first == line.size() || line[first] == '*') {
      if (nl == text.size()) break;
      continue;
    }
    if (line[first] == '+') {
      if (out.empty()) {
        throw Error(ErrorCode::Syntax, "continuation line with nothing to continue", line_no,
                    static_cast<int>(first) + 1);
      }
      tokenize_line(line, line_no, static_cast<int>(first) + 1, out.back().tokens);
      out.back().end_col = static_cast<int>(line.size()) + 1;
    } else {
      Statement st;
      st.line = line_no;
      tokenize_line(line, line_no, static_cast<int>(first), st.tokens);
      st.end_col = static_cast<int>(line.size()) + 1;
      if (!st.tokens.empty()) out.push_back(std::move(st));
    }
    if (nl == text.size()) break;
  }
  return out;
}

std::optional<double> try_parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  if (s[0] == '+') i = 1;
  if (i < s.size() && !(std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' || s[i] == '-')) {
    return std::nullopt;
  }
  double v = 0.0;
  const char* begin = s.data() + i;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v, std::chars_format::general);
  if (ec != std::errc() || !std::isfinite(v)) return std::nullopt;
  std::string_view rest(ptr, static_cast<std::size_t>(end - ptr));
  double scale = 1.0;
  if (rest.size() >= 3 && iequals(rest.substr(0, 3), "meg")) {
    scale = 1e6;
    rest.remove_prefix(3);
  } else if (!rest.empty()) {
    switch (std::tolower(static_cast<unsigned char>(rest[0]))) {
      case 'f': scale = 1e-15; break;
      case 'p': scale = 1e-12; break;
      case 'n': scale = 1e-9; break;
      case 'u': scale = 1e-6; break;
      case 'm': scale = 1e-3; break;
      case 'k': scale = 1e3; break;
      case 'g': scale = 1e9; break;
      case 't': scale = 1e12; break;
      default: scale = 0.0; break;
    }
    if (scale != 0.0) {
      rest.remove_prefix(1);
    } else {
      scale = 1.0;
    }
  }
  // Trailing unit letters ("pF", "ohm") are ignored.
  for (char c : rest) {
    if (!std::isalpha(static_cast<unsigned char>(c))) return std::nullopt;
  }
  const double out = v * scale;
  if (!std::isfinite(out)) return std::nullopt;
  return out;
}

class StatementParser {
public:
  StatementParser(const Statement& st, const std::map<std::string, double>& params)
      : st_(st), params_(params) {}

  bool done() const { return pos_ >= st_.tokens.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    if (pos_ + ahead >= st_.tokens.size()) return eol_;
    return st_.tokens[pos_ + ahead];
  }
  const Token& next() {
    if (done()) fail_at_end("unexpected end of line");
    return st_.tokens[pos_++];
  }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw Error(ErrorCode::Syntax, msg, t.line, t.col);
  }
  [[noreturn]] void fail_at_end(const std::string& msg) const {
    const Token& last = st_.tokens.back();
    throw Error(ErrorCode::Syntax, msg, last.line, last.col + static_cast<int>(last.text.size()));
  }

  std::string word(const char* what) {
    if (done()) fail_at_end(std::string("expected ") + what);
    const Token& t = next();
    if (t.text.size() == 1 && is_punct(t.text[0])) fail(t, std::string("expected ") + what + ", found '" + t.text + "'");
    return t.text;
  }

  double number(const char* what) {
    if (done()) fail_at_end(std::string("expected ") + what);
    const Token& t = next();
    if (auto v = try_parse_number(t.text)) return *v;
    std::string_view ref = t.text;
    if (ref.size() > 2 && ref.front() == '{' && ref.back() == '}') ref = ref.substr(1, ref.size() - 2);
    if (auto it = params_.find(to_lower(ref)); it != params_.end()) return it->second;
    fail(t, std::string("expected ") + what + ", found '" + t.text + "'");
  }

  void expect(char c) {
    if (done()) fail_at_end(std::string("expected '") + c + "'");
    const Token& t = next();
    if (t.text.size() != 1 || t.text[0] != c) fail(t, std::string("expected '") + c + "', found '" + t.text + "'");
  }

  bool at(char c) const { return !done() && peek().text.size() == 1 && peek().text[0] == c; }

  // Numbers up to the closing parenthesis.
  std::vector<double> paren_numbers() {
    expect('(');
    std::vector<double> out;
    while (!at(')')) {
      if (done()) fail_at_end("missing ')'");
      out.push_back(number("number"));
    }
    expect(')');
    return out;
  }

  Waveform waveform() {
    if (done()) fail_at_end("expected source value");
    const Token& head = peek();
    const std::string kw = to_lower(head.text);
    if (kw == "dc") {
      next();
      return DcWave{number("DC value")};
    }
    if (kw == "pulse") {
      next();
      auto a = paren_numbers();
      if (a.size() != 6 && a.size() != 7) fail(head, "PULSE takes 6 or 7 values (v1 v2 td tr tf pw [per])");
      PulseWave p{a[0], a[1], a[2], a[3], a[4], a[5], a.size() == 7 ? a[6] : 0.0};
      check(head, p);
      return p;
    }
    if (kw == "pwl") {
      next();
      auto a = paren_numbers();
      if (a.empty() || a.size() % 2 != 0) fail(head, "PWL takes an even number of values (t v pairs)");
      PwlWave w;
      for (std::size_t i = 0; i < a.size(); i += 2) w.points.push_back({a[i], a[i + 1]});
      check(head, w);
      return w;
    }
    if (kw == "sin") {
      next();
      auto a = paren_numbers();
      if (a.size() != 3 && a.size() != 4) fail(head, "SIN takes 3 or 4 values (vo va freq [td])");
      SineWave s{a[0], a[1], a[2], a.size() == 4 ? a[3] : 0.0};
      check(head, s);
      return s;
    }
    return DcWave{number("source value")};
  }

  struct KeyValue {
    Token key;
    std::size_t value_pos;
  };

  // KEY = VALUE pairs to the end of the statement; the callback consumes the
  // value.
  template <class Fn>
  void key_values(Fn&& on_key) {
    while (!done()) {
      const Token key = next();
      if (!at('=')) fail(key, "expected KEY=VALUE, found '" + key.text + "'");
      next();
      if (done()) fail_at_end("missing value after '" + key.text + "='");
      on_key(key, to_lower(key.text));
    }
  }

  template <class W>
  void check(const Token& t, const W& w) const {
    try {
      check_waveform(Waveform{w});
    } catch (const Error& e) {
      fail(t, e.what());
    }
  }

private:
  const Statement& st_;
  const std::map<std::string, double>& params_;
  std::size_t pos_ = 0;
  Token eol_{};
};

struct DirectiveState {
  bool ended = false;
};

int to_int(StatementParser& p, const Token& t, double v) {
  if (v != std::floor(v) || v < 1 || v > 1e9) p.fail(t, "expected a positive integer");
  return static_cast<int>(v);
}

void parse_directive(const Statement& st, Circuit& c, DirectiveState& state) {
  StatementParser p(st, c.params);
  const Token head = p.next();
  const std::string kw = to_lower(head.text);
  if (kw == ".end") {
    state.ended = true;
    return;
  }
  if (kw == ".title") {
    c.name = p.word("title");
  } else if (kw == ".param") {
    p.key_values([&](const Token&, const std::string& key) { c.params[key] = p.number("parameter value"); });
    return;
  } else if (kw == ".tran") {
    TranDirective t;
    t.dt = p.number("time step");
    t.tstop = p.number("stop time");
    if (!(t.dt > 0) || !(t.tstop > 0)) p.fail(head, ".tran needs positive dt and tstop");
    c.tran = t;
  } else if (kw == ".dc") {
    DcDirective d;
    d.source = p.word("source name");
    d.start = p.number("start value");
    d.stop = p.number("stop value");
    const Token& pts_tok = p.peek();
    d.points = to_int(p, pts_tok, p.number("point count"));
    if (!p.done()) {
      const Token& t = p.next();
      if (!iequals(t.text, "dec")) p.fail(t, "expected 'dec' or end of line");
      d.decade = true;
    }
    c.dc = d;
  } else {
    p.fail(head, "unknown directive '" + head.text + "'");
  }
  if (!p.done()) p.fail(p.peek(), "unexpected token '" + p.peek().text + "'");
}

int node_of(Circuit& c, StatementParser& p, const char* what) {
  return c.node(p.word(what));
}

WindowKind parse_window(StatementParser& p) {
  const Token& t = p.peek();
  const std::string v = to_lower(p.word("window kind"));
  if (v == "joglekar") return WindowKind::Joglekar;
  if (v == "biolek") return WindowKind::Biolek;
  if (v == "none") return WindowKind::None;
  p.fail(t, "unknown window '" + t.text + "' (JOGLEKAR, BIOLEK or NONE)");
}

void parse_device(const Statement& st, Circuit& c) {
  StatementParser p(st, c.params);
  const Token head = p.peek();
  const char prefix = static_cast<char>(std::tolower(static_cast<unsigned char>(head.text[0])));

  DeviceInstance dev;
  switch (prefix) {
    case 'm': {
      dev.name = p.next().text;
      std::vector<Token> nodes;
      while (!p.done() && !(p.peek(1).text == "=")) {
        const Token& t = p.next();
        if (t.text.size() == 1 && is_punct(t.text[0])) p.fail(t, "unexpected '" + t.text + "'");
        nodes.push_back(t);
      }
      if (nodes.size() != 4) {
        p.fail(head, "mosfet " + dev.name + " expects 4 terminals (d g s b), found " +
                         std::to_string(nodes.size()));
      }
      for (const auto& t : nodes) dev.terminals.push_back(c.node(t.text));
      Polarity polarity = Polarity::N;
      std::optional<double> w, l, vth, kp, n_slope, lambda, vt;
      p.key_values([&](const Token& key, const std::string& k) {
        if (k == "type") {
          const Token& vt_tok = p.peek();
          const std::string v = to_lower(p.word("TYPE"));
          if (v == "n" || v == "nmos") {
            polarity = Polarity::N;
          } else if (v == "p" || v == "pmos") {
            polarity = Polarity::P;
          } else {
            p.fail(vt_tok, "TYPE must be N or P");
          }
          return;
        }
        std::optional<double>* slot = nullptr;
        if (k == "w") slot = &w;
        else if (k == "l") slot = &l;
        else if (k == "vth") slot = &vth;
        else if (k == "kp") slot = &kp;
        else if (k == "n") slot = &n_slope;
        else if (k == "lambda") slot = &lambda;
        else if (k == "vt") slot = &vt;
        if (slot == nullptr) p.fail(key, "unknown mosfet parameter '" + key.text + "'");
        *slot = p.number(key.text.c_str());
      });
      // Unspecified parameters fall back to the polarity's default card.
      MosfetCard card = polarity == Polarity::N ? MosfetCard::default_n() : MosfetCard::default_p();
      card.w = w.value_or(card.w);
      card.l = l.value_or(card.l);
      card.vth = vth.value_or(card.vth);
      card.kp = kp.value_or(card.kp);
      card.n_slope = n_slope.value_or(card.n_slope);
      card.lambda = lambda.value_or(card.lambda);
      card.temp_vt = vt.value_or(card.temp_vt);
      dev.card = card;
      break;
    }
    case 'r':
    case 'c': {
      dev.name = p.next().text;
      dev.terminals.push_back(node_of(c, p, "node"));
      dev.terminals.push_back(node_of(c, p, "node"));
      const double value = p.number(prefix == 'r' ? "resistance" : "capacitance");
      if (prefix == 'r') {
        dev.card = ResistorCard{value};
      } else {
        CapacitorCard card{value, std::nullopt};
        p.key_values([&](const Token& key, const std::string& k) {
          if (k != "ic") p.fail(key, "unknown capacitor parameter '" + key.text + "'");
          card.ic = p.number("IC");
        });
        dev.card = card;
      }
      break;
    }
    case 'v':
    case 'i': {
      dev.name = p.next().text;
      dev.terminals.push_back(node_of(c, p, "node"));
      dev.terminals.push_back(node_of(c, p, "node"));
      Waveform w = p.waveform();
      if (prefix == 'v') {
        dev.card = VSourceCard{std::move(w)};
      } else {
        dev.card = ISourceCard{std::move(w)};
      }
      break;
    }
    case 'y': {
      const std::string kind = to_lower(p.next().text);
      if (kind != "ymem" && kind != "ypd") {
        throw Error(ErrorCode::UnknownDevicePrefix,
                    "unknown device '" + head.text + "' (Y devices are YMEM and YPD)", head.line, head.col);
      }
      dev.name = p.word("device name");
      dev.terminals.push_back(node_of(c, p, "node"));
      dev.terminals.push_back(node_of(c, p, "node"));
      if (kind == "ymem") {
        MemristorCard card;
        p.key_values([&](const Token& key, const std::string& k) {
          if (k == "ron") {
            card.r_on = p.number("RON");
          } else if (k == "roff") {
            card.r_off = p.number("ROFF");
          } else if (k == "d") {
            card.d = p.number("D");
          } else if (k == "mu") {
            card.mu_v = p.number("MU");
          } else if (k == "x0") {
            card.x0 = p.number("X0");
          } else if (k == "p") {
            const Token& t = p.peek();
            card.p = to_int(p, t, p.number("P"));
          } else if (k == "window") {
            card.window = parse_window(p);
          } else if (k == "width") {
            card.width = p.number("WIDTH");
          } else if (k == "height") {
            card.height = p.number("HEIGHT");
          } else {
            p.fail(key, "unknown memristor parameter '" + key.text + "'");
          }
        });
        dev.card = card;
      } else {
        PhotodiodeCard card;
        bool have_iph = false;
        p.key_values([&](const Token& key, const std::string& k) {
          if (k == "iph") {
            card.iph = p.waveform();
            have_iph = true;
          } else if (k == "cpd") {
            card.c_pd = p.number("CPD");
          } else if (k == "is") {
            card.i_s = p.number("IS");
          } else if (k == "clamp") {
            card.clamp_enabled = p.number("CLAMP") != 0.0;
          } else {
            p.fail(key, "unknown photodiode parameter '" + key.text + "'");
          }
        });
        if (!have_iph) p.fail(head, "YPD requires IPH=<waveform>");
        dev.card = card;
      }
      break;
    }
    default:
      throw Error(ErrorCode::UnknownDevicePrefix, "unknown device prefix '" + std::string(1, head.text[0]) + "'",
                  head.line, head.col);
  }
  if (!p.done()) p.fail(p.peek(), "unexpected token '" + p.peek().text + "'");

  try {
    c.add_device(std::move(dev));
  } catch (const Error& e) {
    const ErrorCode code = e.code() == ErrorCode::DuplicateName ? ErrorCode::DuplicateName : ErrorCode::Syntax;
    throw Error(code, e.what(), head.line, head.col);
  }
}

}  // namespace

double parse_number(std::string_view text) {
  if (auto v = try_parse_number(text)) return *v;
  throw Error(ErrorCode::Syntax, "invalid number '" + std::string(text) + "'", 1, 1);
}

Waveform parse_waveform(std::string_view text) {
  auto statements = split_statements(text);
  if (statements.size() != 1) throw Error(ErrorCode::Syntax, "expected a single waveform", 1, 1);
  const std::map<std::string, double> none;
  StatementParser p(statements[0], none);
  Waveform w = p.waveform();
  if (!p.done()) p.fail(p.peek(), "unexpected token '" + p.peek().text + "'");
  return w;
}

Circuit parse(std::string_view text) {
  Circuit c;
  DirectiveState state;
  for (const auto& st : split_statements(text)) {
    if (state.ended) break;
    if (st.tokens.front().text[0] == '.') {
      parse_directive(st, c, state);
    } else {
      parse_device(st, c);
    }
  }
  return c;
}

Circuit parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open netlist '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Serializer

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string format_waveform(const Waveform& w) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        auto join = [](std::initializer_list<double> vals) {
          std::string s;
          for (double v : vals) {
            if (!s.empty()) s += ' ';
            s += format_number(v);
          }
          return s;
        };
        if constexpr (std::is_same_v<T, DcWave>) {
          return "DC " + format_number(x.value);
        } else if constexpr (std::is_same_v<T, PulseWave>) {
          return "PULSE(" + join({x.v1, x.v2, x.delay, x.rise, x.fall, x.width, x.period}) + ")";
        } else if constexpr (std::is_same_v<T, PwlWave>) {
          std::string s = "PWL(";
          for (std::size_t i = 0; i < x.points.size(); ++i) {
            if (i) s += ' ';
            s += format_number(x.points[i].t) + ' ' + format_number(x.points[i].v);
          }
          return s + ")";
        } else {
          return "SIN(" + join({x.offset, x.amplitude, x.freq, x.delay}) + ")";
        }
      },
      w);
}

namespace {

const char* window_name(WindowKind w) {
  switch (w) {
    case WindowKind::None: return "NONE";
    case WindowKind::Joglekar: return "JOGLEKAR";
    case WindowKind::Biolek: return "BIOLEK";
  }
  return "NONE";
}

// A photodiode's DC photocurrent is written without the DC keyword so it
// stays a single KEY=VALUE token.
std::string format_iph(const Waveform& w) {
  if (const auto* dc = std::get_if<DcWave>(&w)) return format_number(dc->value);
  return format_waveform(w);
}

}  // namespace

std::string serialize(const Circuit& c) {
  std::ostringstream out;
  const auto& n = [&](int idx) -> const std::string& { return c.node_name(idx); };
  if (!c.name.empty()) out << ".title " << c.name << '\n';
  for (const auto& [k, v] : c.params) out << ".param " << k << '=' << format_number(v) << '\n';
  for (const auto& d : c.devices()) {
    const auto& t = d.terminals;
    std::visit(
        [&](const auto& card) {
          using T = std::decay_t<decltype(card)>;
          if constexpr (std::is_same_v<T, MosfetCard>) {
            out << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << ' ' << n(t[2]) << ' ' << n(t[3])
                << " TYPE=" << (card.polarity == Polarity::N ? 'N' : 'P') << " W=" << format_number(card.w)
                << " L=" << format_number(card.l) << " VTH=" << format_number(card.vth)
                << " KP=" << format_number(card.kp) << " N=" << format_number(card.n_slope)
                << " LAMBDA=" << format_number(card.lambda) << " VT=" << format_number(card.temp_vt);
          } else if constexpr (std::is_same_v<T, MemristorCard>) {
            out << "YMEM " << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << " RON=" << format_number(card.r_on)
                << " ROFF=" << format_number(card.r_off) << " D=" << format_number(card.d)
                << " MU=" << format_number(card.mu_v) << " X0=" << format_number(card.x0) << " P=" << card.p
                << " WINDOW=" << window_name(card.window) << " WIDTH=" << format_number(card.width)
                << " HEIGHT=" << format_number(card.height);
          } else if constexpr (std::is_same_v<T, ResistorCard>) {
            out << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << ' ' << format_number(card.r);
          } else if constexpr (std::is_same_v<T, CapacitorCard>) {
            out << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << ' ' << format_number(card.c);
            if (card.ic) out << " IC=" << format_number(*card.ic);
          } else if constexpr (std::is_same_v<T, VSourceCard> || std::is_same_v<T, ISourceCard>) {
            out << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << ' ' << format_waveform(card.wave);
          } else {
            out << "YPD " << d.name << ' ' << n(t[0]) << ' ' << n(t[1]) << " IPH=" << format_iph(card.iph)
                << " CPD=" << format_number(card.c_pd) << " IS=" << format_number(card.i_s)
                << " CLAMP=" << (card.clamp_enabled ? 1 : 0);
          }
        },
        d.card);
    out << '\n';
  }
  if (c.tran) out << ".tran " << format_number(c.tran->dt) << ' ' << format_number(c.tran->tstop) << '\n';
  if (c.dc) {
    out << ".dc " << c.dc->source << ' ' << format_number(c.dc->start) << ' ' << format_number(c.dc->stop) << ' '
        << c.dc->points << (c.dc->decade ? " dec" : "") << '\n';
  }
  out << ".end\n";
  return out.str();
}

}  // namespace pixsim
