#include "impvar/problem_file.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "impvar/errors.hpp"

namespace impvar {

namespace {

const char* const kExample4 = R"prob(# Two impulses on [0, 1] with h = 1 (so H(t) = t).
# Sublinear odd nonlinearities of order |u|^{1/2}; no perturbation.
format_version = 1
name = "example4"

[partition]
T = 1.0
t = 0.2, 0.6
s = 0.4, 0.8

[coefficients]
h = "1"
beta = 1.0
epsilon = 0.0
delta = 0.9

[nonlinearity.0]
f = "abs(u)^(-1/2)*u"
g = "0"

[nonlinearity.1]
f = "abs(u)^(-1/2)*u*(1 + 0.1*sin(abs(u)))"
g = "0"

[nonlinearity.2]
f = "abs(u)^(-1/2)*u"
g = "0"

[impulse.1]
I = "abs(u)^(-1/2)*u"

[impulse.2]
I = "abs(u)^(-2/3)*u"

[growth]
a1 = 1.1
theta1 = 1.5
a2 = 5.0
theta2 = 1.3333333333333333
a_star = 0.56
)prob";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct Value {
    std::string text;
    bool quoted = false;
    int line = 0;
};

class Reader {
public:
    explicit Reader(std::string_view text) { read(text); }

    const std::map<std::string, std::map<std::string, Value>>& sections() const { return sections_; }

    [[noreturn]] static void fail(int line, const std::string& msg) {
        throw SpecError("line " + std::to_string(line) + ": " + msg);
    }

private:
    void read(std::string_view text) {
        std::string section;
        int line_no = 0;
        while (!text.empty()) {
            const auto nl = text.find('\n');
            std::string_view line = text.substr(0, nl);
            text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
            ++line_no;
            line = trim(strip_comment(line));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') fail(line_no, "unterminated section header");
                section = std::string(trim(line.substr(1, line.size() - 2)));
                if (section.empty()) fail(line_no, "empty section name");
                if (!seen_.insert(section).second) fail(line_no, "duplicate section [" + section + "]");
                sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) fail(line_no, "expected key = value");
            const std::string key(trim(line.substr(0, eq)));
            const std::string_view raw = trim(line.substr(eq + 1));
            if (key.empty()) fail(line_no, "missing key");
            Value v;
            v.line = line_no;
            if (!raw.empty() && raw.front() == '"') {
                if (raw.size() < 2 || raw.back() != '"') fail(line_no, "unterminated string");
                v.text = std::string(raw.substr(1, raw.size() - 2));
                v.quoted = true;
            } else {
                v.text = std::string(raw);
            }
            auto& sec = sections_[section];
            if (sec.count(key)) fail(line_no, "duplicate key '" + key + "'");
            sec[key] = v;
        }
    }

    static std::string_view strip_comment(std::string_view line) {
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) return line.substr(0, i);
        }
        return line;
    }

    std::map<std::string, std::map<std::string, Value>> sections_;
    std::set<std::string> seen_;
};

// Decimal literal: optional sign, digits, optional fraction, optional exponent.
double parse_decimal(std::string_view s, int line) {
    s = trim(s);
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    const std::size_t digits_start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    bool any = i > digits_start;
    if (i < s.size() && s[i] == '.') {
        ++i;
        const std::size_t f = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        any |= i > f;
    }
    if (any && i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
        const std::size_t e = i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
        if (i == e) any = false;
    }
    if (!any || i != s.size()) Reader::fail(line, "expected a decimal literal, got '" + std::string(s) + "'");
    const std::string buf(s.front() == '+' ? s.substr(1) : s);
    double v = 0.0;
    const auto res = std::from_chars(buf.data(), buf.data() + buf.size(), v);
    if (res.ec != std::errc()) Reader::fail(line, "number out of range: '" + buf + "'");
    return v;
}

std::vector<double> parse_list(const Value& v) {
    if (v.quoted) Reader::fail(v.line, "expected a list of numbers");
    std::vector<double> out;
    std::string_view s = v.text;
    if (trim(s).empty()) return out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(parse_decimal(s.substr(0, comma), v.line));
        if (comma == std::string_view::npos) break;
        s = s.substr(comma + 1);
    }
    return out;
}

class Fields {
public:
    Fields(const std::map<std::string, Value>& kv, std::string name) : kv_(kv), name_(std::move(name)) {}

    const Value& require(const std::string& key) {
        used_.insert(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw SpecError("[" + name_ + "]: missing key '" + key + "'");
        return it->second;
    }
    std::optional<Value> optional(const std::string& key) {
        used_.insert(key);
        const auto it = kv_.find(key);
        if (it == kv_.end()) return std::nullopt;
        return it->second;
    }
    double number(const std::string& key) {
        const Value& v = require(key);
        if (v.quoted) Reader::fail(v.line, "'" + key + "' must be a number");
        return parse_decimal(v.text, v.line);
    }
    Expr expression(const Value& v, const std::string& key) {
        if (!v.quoted) Reader::fail(v.line, "'" + key + "' must be a quoted expression");
        try {
            return Expr::parse(v.text);
        } catch (const ParseError& e) {
            Reader::fail(v.line, "in '" + key + "': " + e.what());
        }
    }
    Expr expression(const std::string& key) { return expression(require(key), key); }
    void finish() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) Reader::fail(v.line, "unknown key '" + k + "' in [" + name_ + "]");
    }

private:
    const std::map<std::string, Value>& kv_;
    std::string name_;
    std::set<std::string> used_;
};

}  // namespace

ProblemSpec parse_problem_text(std::string_view text) {
    const Reader r(text);
    const auto& secs = r.sections();
    static const std::map<std::string, Value> empty;
    auto section = [&](const std::string& name) -> const std::map<std::string, Value>& {
        const auto it = secs.find(name);
        if (it == secs.end()) throw SpecError("missing section [" + name + "]");
        return it->second;
    };

    ProblemSpec spec;
    {
        const auto it = secs.find("");
        Fields top(it == secs.end() ? empty : it->second, "top level");
        const Value& ver = top.require("format_version");
        if (ver.text != std::to_string(kProblemFormatVersion))
            Reader::fail(ver.line, "unsupported format_version '" + ver.text + "'");
        if (auto name = top.optional("name")) spec.name = name->text;
        top.finish();
    }
    {
        Fields p(section("partition"), "partition");
        const double T = p.number("T");
        const auto t = parse_list(p.require("t"));
        const auto s = parse_list(p.require("s"));
        p.finish();
        spec.partition = Partition::make(T, t, s);
    }
    const std::size_t N = spec.N();
    {
        Fields c(section("coefficients"), "coefficients");
        spec.h = c.expression("h");
        spec.beta = c.number("beta");
        spec.epsilon = c.number("epsilon");
        spec.delta = c.number("delta");
        c.finish();
    }
    for (std::size_t i = 0; i <= N; ++i) {
        const std::string name = "nonlinearity." + std::to_string(i);
        Fields n(section(name), name);
        spec.f.push_back(n.expression("f"));
        const auto g = n.optional("g");
        spec.g.push_back(g ? n.expression(*g, "g") : Expr());
        n.finish();
    }
    for (std::size_t k = 1; k <= N; ++k) {
        const std::string name = "impulse." + std::to_string(k);
        Fields n(section(name), name);
        spec.impulses.push_back(n.expression("I"));
        n.finish();
    }
    {
        Fields g(section("growth"), "growth");
        spec.growth.a1 = g.number("a1");
        spec.growth.theta1 = g.number("theta1");
        spec.growth.a2 = g.number("a2");
        spec.growth.theta2 = g.number("theta2");
        spec.growth.a_star = g.number("a_star");
        g.finish();
    }
    for (const auto& [name, kv] : secs) {
        if (name.empty() || name == "partition" || name == "coefficients" || name == "growth") continue;
        bool known = false;
        for (std::size_t i = 0; i <= N; ++i) known |= name == "nonlinearity." + std::to_string(i);
        for (std::size_t k = 1; k <= N; ++k) known |= name == "impulse." + std::to_string(k);
        if (!known) throw SpecError("unexpected section [" + name + "]");
    }
    spec.validate_structure();
    return spec;
}

LoadedProblem load_problem_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SpecError("cannot open problem file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    LoadedProblem lp;
    lp.text = ss.str();
    lp.path = path.string();
    try {
        lp.spec = parse_problem_text(lp.text);
    } catch (const SpecError& e) {
        throw SpecError(path.string() + ": " + e.what());
    }
    return lp;
}

const std::string& example4_text() {
    static const std::string text(kExample4);
    return text;
}

ProblemSpec example4_spec() { return parse_problem_text(example4_text()); }

}  // namespace impvar
