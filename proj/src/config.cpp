#include "weylwalk/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

namespace weylwalk::config {

namespace {

// ---------------------------------------------------------------------------
// Minimal strict TOML subset: tables, arrays of tables, bare/quoted keys,
// strings, numbers, booleans, (nested) arrays. Enough for the config schema;
// anything else is a parse error with line/column.
// ---------------------------------------------------------------------------

struct TomlValue;
using TomlArray = std::vector<TomlValue>;
using TomlTable = std::map<std::string, TomlValue>;

struct TomlValue {
    std::variant<bool, int64_t, double, std::string, TomlArray, TomlTable> v;
};

struct Parser {
    const std::string& text;
    const std::string& origin;
    size_t pos = 0;
    int line = 1, col = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << origin << ":" << line << ":" << col << ": " << msg;
        throw ConfigError(os.str());
    }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char advance() {
        const char c = text[pos++];
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return c;
    }

    void skip_ws(bool newlines) {
        while (!eof()) {
            const char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') advance();
            } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
                advance();
            } else {
                break;
            }
        }
    }

    void expect(char c) {
        if (eof() || peek() != c) fail(std::string("expected '") + c + "'");
        advance();
    }

    std::string bare_key() {
        std::string out;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                          peek() == '-'))
            out += advance();
        if (out.empty()) fail("expected a key");
        return out;
    }

    std::string string_literal() {
        expect('"');
        std::string out;
        while (!eof() && peek() != '"') {
            char c = advance();
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                const char e = advance();
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': c = '"'; break;
                    case '\\': c = '\\'; break;
                    default: fail("unsupported escape sequence");
                }
            } else if (c == '\n') {
                fail("newline in string literal");
            }
            out += c;
        }
        expect('"');
        return out;
    }

    TomlValue scalar_or_array() {
        skip_ws(false);
        if (eof()) fail("expected a value");
        const char c = peek();
        if (c == '[') {
            advance();
            TomlArray arr;
            skip_ws(true);
            if (!eof() && peek() == ']') {
                advance();
                return {arr};
            }
            while (true) {
                arr.push_back(scalar_or_array());
                skip_ws(true);
                if (!eof() && peek() == ',') {
                    advance();
                    skip_ws(true);
                    if (!eof() && peek() == ']') { // trailing comma
                        advance();
                        break;
                    }
                    continue;
                }
                expect(']');
                break;
            }
            return {arr};
        }
        if (c == '"') return {string_literal()};
        // bare token: bool or number
        std::string tok;
        while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' ||
                          peek() == '-' || peek() == '.' || peek() == '_'))
            tok += advance();
        if (tok == "true") return {true};
        if (tok == "false") return {false};
        if (tok.empty()) fail("expected a value");
        std::string digits;
        for (char d : tok)
            if (d != '_') digits += d;
        // integer first, then float
        {
            int64_t iv{};
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), iv);
            if (ec == std::errc() && p == digits.data() + digits.size()) return {iv};
        }
        {
            double dv{};
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dv);
            if (ec == std::errc() && p == digits.data() + digits.size()) return {dv};
        }
        if (digits == "inf") return {std::numeric_limits<double>::infinity()};
        fail("cannot parse value '" + tok + "'");
    }

    std::vector<std::string> key_path() {
        std::vector<std::string> path;
        while (true) {
            skip_ws(false);
            if (!eof() && peek() == '"')
                path.push_back(string_literal());
            else
                path.push_back(bare_key());
            skip_ws(false);
            if (!eof() && peek() == '.') {
                advance();
                continue;
            }
            return path;
        }
    }
};

TomlTable* descend(TomlTable& root, const std::vector<std::string>& path, Parser& p) {
    TomlTable* cur = &root;
    for (const auto& key : path) {
        auto it = cur->find(key);
        if (it == cur->end()) {
            it = cur->emplace(key, TomlValue{TomlTable{}}).first;
        }
        if (auto* tbl = std::get_if<TomlTable>(&it->second.v)) {
            cur = tbl;
        } else if (auto* arr = std::get_if<TomlArray>(&it->second.v)) {
            if (arr->empty() || !std::get_if<TomlTable>(&arr->back().v))
                p.fail("key '" + key + "' is not a table");
            cur = std::get_if<TomlTable>(&arr->back().v);
        } else {
            p.fail("key '" + key + "' is not a table");
        }
    }
    return cur;
}

TomlTable parse_toml(const std::string& text, const std::string& origin) {
    Parser p{text, origin};
    TomlTable root;
    TomlTable* current = &root;

    while (true) {
        p.skip_ws(true);
        if (p.eof()) break;
        if (p.peek() == '[') {
            p.advance();
            const bool array_of_tables = !p.eof() && p.peek() == '[';
            if (array_of_tables) p.advance();
            const auto path = p.key_path();
            p.expect(']');
            if (array_of_tables) p.expect(']');
            if (array_of_tables) {
                TomlTable* parent =
                    descend(root, {path.begin(), path.end() - 1}, p);
                auto it = parent->find(path.back());
                if (it == parent->end())
                    it = parent->emplace(path.back(), TomlValue{TomlArray{}}).first;
                auto* arr = std::get_if<TomlArray>(&it->second.v);
                if (!arr) p.fail("key '" + path.back() + "' is not an array of tables");
                arr->push_back(TomlValue{TomlTable{}});
                current = std::get_if<TomlTable>(&arr->back().v);
            } else {
                current = descend(root, path, p);
            }
            continue;
        }
        const auto path = p.key_path();
        p.skip_ws(false);
        p.expect('=');
        TomlValue value = p.scalar_or_array();
        TomlTable* target = current;
        if (path.size() > 1)
            target = descend(*current, {path.begin(), path.end() - 1}, p);
        if (!target->emplace(path.back(), std::move(value)).second)
            p.fail("duplicate key '" + path.back() + "'");
        p.skip_ws(false);
        if (!p.eof() && p.peek() != '\n' && p.peek() != '#') p.fail("trailing characters after value");
    }
    return root;
}

// ---------------------------------------------------------------------------
// Schema mapping
// ---------------------------------------------------------------------------

double as_double(const TomlValue& v, const std::string& what) {
    if (const auto* d = std::get_if<double>(&v.v)) return *d;
    if (const auto* i = std::get_if<int64_t>(&v.v)) return static_cast<double>(*i);
    throw ConfigError(what + " must be a number");
}

std::string as_string(const TomlValue& v, const std::string& what) {
    if (const auto* s = std::get_if<std::string>(&v.v)) return *s;
    throw ConfigError(what + " must be a string");
}

std::vector<double> as_double_array(const TomlValue& v, const std::string& what) {
    const auto* arr = std::get_if<TomlArray>(&v.v);
    if (!arr) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> out;
    out.reserve(arr->size());
    for (const auto& e : *arr) out.push_back(as_double(e, what + " entry"));
    return out;
}

seq::ParamSeq seq_from_table(const TomlTable& t, const std::string& what) {
    std::set<std::string> seen;
    auto get = [&](const char* key) -> const TomlValue* {
        auto it = t.find(key);
        if (it == t.end()) return nullptr;
        seen.insert(key);
        return &it->second;
    };
    const TomlValue* kind_v = get("kind");
    if (!kind_v) throw ConfigError(what + ": missing 'kind'");
    const std::string kind = as_string(*kind_v, what + ".kind");

    seq::ParamSeq s = seq::ParamSeq::zero();
    if (kind == "zero") {
        s = seq::ParamSeq::zero();
    } else if (kind == "finite") {
        const TomlValue* vals = get("values");
        if (!vals) throw ConfigError(what + ": finite sequence needs 'values'");
        s = seq::ParamSeq::finite(as_double_array(*vals, what + ".values"));
    } else if (kind == "geometric") {
        const TomlValue *c = get("c"), *q = get("q");
        if (!c || !q) throw ConfigError(what + ": geometric sequence needs 'c' and 'q'");
        s = seq::ParamSeq::geometric(as_double(*c, what + ".c"), as_double(*q, what + ".q"));
    } else if (kind == "power") {
        const TomlValue *c = get("c"), *pp = get("p");
        if (!c || !pp) throw ConfigError(what + ": power sequence needs 'c' and 'p'");
        s = seq::ParamSeq::power(as_double(*c, what + ".c"), as_double(*pp, what + ".p"));
    } else {
        throw ConfigError(what + ": unknown sequence kind '" + kind + "'");
    }
    if (const TomlValue* prefix = get("prefix")) {
        // explicit leading terms override the closed form
        const auto head = as_double_array(*prefix, what + ".prefix");
        const seq::ParamSeq base = s.with_prefix_extended(static_cast<int>(head.size()));
        std::vector<double> add(head.size());
        for (size_t i = 0; i < head.size(); ++i)
            add[i] = head[i] - base.term(static_cast<int>(i) + 1);
        s = base.plus(seq::ParamSeq::finite(std::move(add)));
    }
    for (const auto& [key, val] : t) {
        (void)val;
        if (!seen.count(key)) throw ConfigError(what + ": unknown key '" + key + "'");
    }
    return s;
}

experiments::Value toml_to_param(const TomlValue& v, const std::string& what) {
    if (const auto* b = std::get_if<bool>(&v.v)) return *b;
    if (const auto* i = std::get_if<int64_t>(&v.v)) return *i;
    if (const auto* d = std::get_if<double>(&v.v)) return *d;
    if (const auto* s = std::get_if<std::string>(&v.v)) return *s;
    if (std::get_if<TomlArray>(&v.v)) return as_double_array(v, what);
    throw ConfigError(what + ": tables are not valid scenario parameters");
}

Config map_config(const TomlTable& root) {
    Config cfg;
    std::set<std::string> seen;
    auto get = [&](const char* key) -> const TomlValue* {
        auto it = root.find(key);
        if (it == root.end()) return nullptr;
        seen.insert(key);
        return &it->second;
    };

    if (const TomlValue* s = get("seed")) cfg.seed = static_cast<uint64_t>(as_double(*s, "seed"));
    if (const TomlValue* o = get("out_dir")) cfg.out_dir = as_string(*o, "out_dir");
    if (const TomlValue* t = get("tolerances")) {
        const auto* tbl = std::get_if<TomlTable>(&t->v);
        if (!tbl) throw ConfigError("tolerances must be a table");
        for (const auto& [key, val] : *tbl) {
            if (key == "eps")
                cfg.eps = as_double(val, "tolerances.eps");
            else if (key == "mc_sigma")
                cfg.mc_sigma = as_double(val, "tolerances.mc_sigma");
            else
                throw ConfigError("tolerances: unknown key '" + key + "'");
        }
    }

    if (const TomlValue* s = get("sequences")) {
        const auto* tbl = std::get_if<TomlTable>(&s->v);
        if (!tbl) throw ConfigError("sequences must be a table of tables");
        for (const auto& [name, val] : *tbl) {
            const auto* def = std::get_if<TomlTable>(&val.v);
            if (!def) throw ConfigError("sequences." + name + " must be a table");
            cfg.registry.sequences.emplace(name, seq_from_table(*def, "sequences." + name));
        }
    }

    if (const TomlValue* b = get("blocks")) {
        const auto* tbl = std::get_if<TomlTable>(&b->v);
        if (!tbl) throw ConfigError("blocks must be a table of tables");
        for (const auto& [name, val] : *tbl) {
            const auto* def = std::get_if<TomlTable>(&val.v);
            if (!def) throw ConfigError("blocks." + name + " must be a table");
            std::vector<kernels::Interval1D> prefix;
            seq::ParamSeq shift = seq::ParamSeq::zero(), delta = seq::ParamSeq::zero();
            for (const auto& [key, field] : *def) {
                const std::string what = "blocks." + name + "." + key;
                if (key == "prefix") {
                    const auto* arr = std::get_if<TomlArray>(&field.v);
                    if (!arr) throw ConfigError(what + " must be an array of [lo, hi] pairs");
                    for (const auto& e : *arr) {
                        const auto pair = as_double_array(e, what + " entry");
                        if (pair.size() != 2) throw ConfigError(what + " entries must be pairs");
                        prefix.push_back({pair[0], pair[1]});
                    }
                } else if (key == "tail_shift" || key == "tail_delta") {
                    const std::string ref = as_string(field, what);
                    seq::ParamSeq resolved = seq::ParamSeq::zero();
                    if (ref != "zero") {
                        auto it = cfg.registry.sequences.find(ref);
                        if (it == cfg.registry.sequences.end())
                            throw ConfigError(what + ": unknown sequence '" + ref + "'");
                        resolved = it->second;
                    }
                    (key == "tail_shift" ? shift : delta) = resolved;
                } else {
                    throw ConfigError(what + ": unknown key");
                }
            }
            cfg.registry.block_defs.emplace(name,
                                            blocks::Block(std::move(prefix), shift, delta));
        }
    }

    if (const TomlValue* o = get("operators")) {
        const auto* tbl = std::get_if<TomlTable>(&o->v);
        if (!tbl) throw ConfigError("operators must be a table of tables");
        for (const auto& [name, val] : *tbl) {
            const auto* def = std::get_if<TomlTable>(&val.v);
            if (!def) throw ConfigError("operators." + name + " must be a table");
            std::string label = "D";
            const seq::ParamSeq* eigs = nullptr;
            for (const auto& [key, field] : *def) {
                const std::string what = "operators." + name + "." + key;
                if (key == "eigs") {
                    const std::string ref = as_string(field, what);
                    auto it = cfg.registry.sequences.find(ref);
                    if (it == cfg.registry.sequences.end())
                        throw ConfigError(what + ": unknown sequence '" + ref + "'");
                    eigs = &it->second;
                } else if (key == "label") {
                    label = as_string(field, what);
                } else {
                    throw ConfigError(what + ": unknown key");
                }
            }
            if (!eigs) throw ConfigError("operators." + name + ": missing 'eigs'");
            cfg.registry.diag_ops.emplace(name, operators::DiagOp(*eigs, label));
        }
    }

    if (const TomlValue* s = get("scenarios")) {
        const auto* arr = std::get_if<TomlArray>(&s->v);
        if (!arr) throw ConfigError("scenarios must be an array of tables ([[scenarios]])");
        for (const auto& entry : *arr) {
            const auto* tbl = std::get_if<TomlTable>(&entry.v);
            if (!tbl) throw ConfigError("each [[scenarios]] entry must be a table");
            experiments::Scenario sc;
            sc.seed = cfg.seed;
            for (const auto& [key, val] : *tbl) {
                if (key == "name") {
                    sc.name = as_string(val, "scenario name");
                } else if (key == "seed") {
                    sc.seed = static_cast<uint64_t>(as_double(val, "scenario seed"));
                } else {
                    sc.params[key] = toml_to_param(val, "scenario param '" + key + "'");
                }
            }
            if (sc.name.empty()) throw ConfigError("scenario without a name");
            const auto& known = experiments::scenario_names();
            if (std::find(known.begin(), known.end(), sc.name) == known.end())
                throw ConfigError("unknown scenario '" + sc.name + "'");
            sc.params.emplace("eps", cfg.eps);
            sc.params.emplace("mc_sigma", cfg.mc_sigma);
            cfg.scenarios.push_back(std::move(sc));
        }
    }

    for (const auto& [key, val] : root) {
        (void)val;
        if (!seen.count(key) && key != "sequences" && key != "blocks" && key != "operators" &&
            key != "scenarios" && key != "tolerances")
            throw ConfigError("unknown top-level key '" + key + "'");
    }
    return cfg;
}

} // namespace

Config parse_string(const std::string& text, const std::string& origin) {
    return map_config(parse_toml(text, origin));
}

Config load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
}

void apply_override(Config& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: '" + assignment + "'");
    const std::string path = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);

    TomlValue parsed = [&] {
        Parser p{raw, assignment};
        return p.scalar_or_array();
    }();

    const auto dot = path.find('.');
    const std::string head = dot == std::string::npos ? path : path.substr(0, dot);
    const std::string tail = dot == std::string::npos ? "" : path.substr(dot + 1);

    if (head == "seed" && tail.empty()) {
        cfg.seed = static_cast<uint64_t>(as_double(parsed, "seed"));
        for (auto& sc : cfg.scenarios) sc.seed = cfg.seed;
        return;
    }
    if (head == "out_dir" && tail.empty()) {
        cfg.out_dir = as_string(parsed, "out_dir");
        return;
    }
    if (head == "tolerances") {
        if (tail == "eps")
            cfg.eps = as_double(parsed, "eps");
        else if (tail == "mc_sigma")
            cfg.mc_sigma = as_double(parsed, "mc_sigma");
        else
            throw ConfigError("unknown tolerance '" + tail + "'");
        for (auto& sc : cfg.scenarios) {
            sc.params["eps"] = cfg.eps;
            sc.params["mc_sigma"] = cfg.mc_sigma;
        }
        return;
    }
    const std::string key = tail.empty() ? head : tail;
    const experiments::Value v = toml_to_param(parsed, "override '" + assignment + "'");
    bool applied = false;
    for (auto& sc : cfg.scenarios) {
        if (!tail.empty() && sc.name != head && head != "walks" && head != "all") continue;
        sc.params[key] = v;
        applied = true;
    }
    if (!applied) throw ConfigError("override matched no scenario: '" + assignment + "'");
}

Config default_config() {
    // canonical parameters; scenario defaults fill in the rest
    static const char* toml = R"(
seed = 20240817
out_dir = "runs"

[tolerances]
eps = 1e-9
mc_sigma = 3.0

[sequences.h_geometric]
kind = "geometric"
c = 1.0
q = 0.5

[sequences.h_harmonic]
kind = "power"
c = 1.0
p = 1.0

[sequences.d_slow]
kind = "power"
c = 0.1
p = 2.0

[[scenarios]]
name = "continuity_criterion"
h = "h_geometric"
h_div = "h_harmonic"

[[scenarios]]
name = "shift_truncation"
h = "h_geometric"

[[scenarios]]
name = "triviality_contrast"
D = "d_slow"

[[scenarios]]
name = "fourier_decay"

[[scenarios]]
name = "taylor_check"

[[scenarios]]
name = "mom_taylor_check"

[[scenarios]]
name = "bound_checks"

[[scenarios]]
name = "diffusion_chernoff"
M = 100000

[[scenarios]]
name = "oscillator_chernoff"
M = 1000000

[[scenarios]]
name = "pmix_chernoff"
M = 1000000
)";
    return parse_string(toml, "<default>");
}

} // namespace weylwalk::config
