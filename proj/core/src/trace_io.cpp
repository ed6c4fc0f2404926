#include "rtovc/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <set>
#include <stdexcept>

#include "rtovc/config_io.hpp"
#include "rtovc/errors.hpp"

namespace rtovc {

namespace {

enum class Kind { Real, Index };

struct Field {
    TraceColumn column;
    Kind kind;
    double TraceRow::*real = nullptr;
    std::uint32_t TraceRow::*index = nullptr;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        {{"t", "s"}, Kind::Real, &TraceRow::t},
        {{"wheel", "-"}, Kind::Index, nullptr, &TraceRow::wheel},
        {{"v_d", "m/s"}, Kind::Real, &TraceRow::v_d},
        {{"v_w", "m/s"}, Kind::Real, &TraceRow::v_w},
        {{"v_e", "m/s"}, Kind::Real, &TraceRow::v_e},
        {{"omega_w", "rad/s"}, Kind::Real, &TraceRow::omega_w},
        {{"tau_m", "N*m"}, Kind::Real, &TraceRow::tau_m},
        {{"delta_p", "Pa"}, Kind::Real, &TraceRow::delta_p},
        {{"tau_w_hat", "N*m"}, Kind::Real, &TraceRow::tau_w_hat},
        {{"tau_m_hat", "N*m"}, Kind::Real, &TraceRow::tau_m_hat},
        {{"beta1", "s/m"}, Kind::Real, &TraceRow::beta1},
        {{"beta2", "1/(N*m)"}, Kind::Real, &TraceRow::beta2},
        {{"u_raw", "-"}, Kind::Real, &TraceRow::u_raw},
        {{"u_sat", "-"}, Kind::Real, &TraceRow::u_sat},
        {{"lambda1", "-"}, Kind::Real, &TraceRow::lambda1},
        {{"lambda2", "-"}, Kind::Real, &TraceRow::lambda2},
        {{"spool", "-"}, Kind::Real, &TraceRow::spool},
        {{"psi1_hat", "-"}, Kind::Real, &TraceRow::psi1_hat},
        {{"psi2_hat", "-"}, Kind::Real, &TraceRow::psi2_hat},
        {{"g1_nominal", "m/s^2"}, Kind::Real, &TraceRow::g1_nominal},
        {{"disturbance", "m/s^2"}, Kind::Real, &TraceRow::disturbance},
        {{"f1_star", "m/s^2"}, Kind::Real, &TraceRow::f1_star},
        {{"a2", "N*m/s"}, Kind::Real, &TraceRow::a2},
        {{"status", "-"}, Kind::Index, nullptr, &TraceRow::status},
        {{"cause", "-"}, Kind::Index, nullptr, &TraceRow::cause},
        {{"pressure_clamps", "-"}, Kind::Index, nullptr, &TraceRow::pressure_clamps},
    };
    return f;
}

constexpr const char* kMagic = "# rtovc-trace v";
constexpr const char* kHashTag = "# config_hash ";
constexpr const char* kConfigTag = "# config ";
constexpr const char* kStrideTag = "# stride ";

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace

const std::vector<TraceColumn>& trace_columns() {
    static const std::vector<TraceColumn> cols = [] {
        std::vector<TraceColumn> c;
        for (const Field& f : fields()) c.push_back(f.column);
        return c;
    }();
    return cols;
}

void write_trace(std::ostream& out, const ScenarioConfig& cfg, const SimTrace& trace) {
    const std::string text = serialize_config(cfg);
    out << kMagic << kTraceVersion << '\n';
    out << kHashTag << fnv1a_hex(text) << '\n';
    out << kStrideTag << trace.stride << '\n';
    std::istringstream lines(text);
    for (std::string line; std::getline(lines, line);) out << kConfigTag << line << '\n';

    const auto& fs = fields();
    for (std::size_t i = 0; i < fs.size(); ++i) out << (i ? "," : "") << fs[i].column.name;
    out << '\n';
    for (std::size_t i = 0; i < fs.size(); ++i) out << (i ? "," : "") << fs[i].column.unit;
    out << '\n';

    std::string row;
    char buf[64];
    for (const TraceRow& r : trace.rows) {
        row.clear();
        for (std::size_t i = 0; i < fs.size(); ++i) {
            if (i) row += ',';
            const auto res = fs[i].kind == Kind::Real ? std::to_chars(buf, buf + sizeof buf, r.*(fs[i].real))
                                                      : std::to_chars(buf, buf + sizeof buf, r.*(fs[i].index));
            row.append(buf, res.ptr);
        }
        row += '\n';
        out << row;
    }
}

void write_trace_file(const std::string& path, const ScenarioConfig& cfg, const SimTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    write_trace(out, cfg, trace);
    if (!out) throw std::runtime_error(path + ": write failed");
}

TraceFile read_trace(std::istream& in, const std::string& source) {
    TraceFile f;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) -> void {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": " + what);
    };
    std::string line;
    if (!std::getline(in, line) || !starts_with(line, kMagic)) {
        line_no = 1;
        fail("not a trace file (missing version header)");
    }
    ++line_no;
    f.version = std::stoi(line.substr(std::string_view(kMagic).size()));
    if (f.version != kTraceVersion) fail("unsupported trace version " + std::to_string(f.version));

    const auto& fs = fields();
    bool have_names = false, have_units = false;
    std::set<std::uint32_t> wheels;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (starts_with(line, kHashTag)) f.config_hash = line.substr(std::string_view(kHashTag).size());
            else if (starts_with(line, kConfigTag))
                f.config_text += line.substr(std::string_view(kConfigTag).size()) + '\n';
            else if (starts_with(line, kStrideTag))
                f.trace.stride = std::stoul(line.substr(std::string_view(kStrideTag).size()));
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != fs.size())
            fail("expected " + std::to_string(fs.size()) + " columns, found " + std::to_string(cells.size()));
        if (!have_names) {
            for (std::size_t i = 0; i < fs.size(); ++i)
                if (cells[i] != fs[i].column.name) fail("unexpected column '" + std::string(cells[i]) + "'");
            have_names = true;
            continue;
        }
        if (!have_units) {
            for (std::size_t i = 0; i < fs.size(); ++i)
                if (cells[i] != fs[i].column.unit) fail("unexpected unit '" + std::string(cells[i]) + "'");
            have_units = true;
            continue;
        }
        TraceRow r{};
        for (std::size_t i = 0; i < fs.size(); ++i) {
            const std::string_view c = cells[i];
            std::from_chars_result res;
            if (fs[i].kind == Kind::Real) res = std::from_chars(c.data(), c.data() + c.size(), r.*(fs[i].real));
            else res = std::from_chars(c.data(), c.data() + c.size(), r.*(fs[i].index));
            if (res.ec != std::errc() || res.ptr != c.data() + c.size())
                fail("cannot parse '" + std::string(c) + "' in column " + fs[i].column.name);
        }
        wheels.insert(r.wheel);
        f.trace.rows.push_back(r);
    }
    if (!have_names || !have_units) fail("missing column or unit row");
    if (f.config_hash.empty()) fail("missing config hash");
    f.trace.wheels.assign(wheels.begin(), wheels.end());
    const ScenarioConfig cfg = f.config();
    f.trace.dt = cfg.dt;
    return f;
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open trace");
    return read_trace(in, path);
}

ScenarioConfig TraceFile::config() const {
    if (fnv1a_hex(config_text) != config_hash)
        throw ConfigError("embedded config does not match the trace's config hash");
    return parse_config_string(config_text, "<trace config>");
}

std::vector<std::pair<double, double>> TraceFile::signal(const std::string& name, std::uint32_t wheel) const {
    const auto& fs = fields();
    for (const Field& f : fs) {
        if (name != f.column.name) continue;
        std::vector<std::pair<double, double>> out;
        for (const TraceRow& r : trace.rows) {
            if (r.wheel != wheel) continue;
            const double v = f.kind == Kind::Real ? r.*(f.real) : static_cast<double>(r.*(f.index));
            out.emplace_back(r.t, v);
        }
        return out;
    }
    throw std::out_of_range("unknown signal '" + name + "'");
}

}  // namespace rtovc
