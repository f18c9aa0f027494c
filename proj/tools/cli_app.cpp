#include "cli_app.hpp"

#include "hodmd.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hodmd::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form, independent of the locale.
std::string fmt(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), res.ptr};
}

double parse_double(const std::string& s, const std::string& what)
{
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw UsageError("cannot parse " + what + " from '" + s + "'");
    }
    return v;
}

std::size_t parse_count(const std::string& s, const std::string& what)
{
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw UsageError("cannot parse " + what + " from '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string utc_now()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), {}};
}

void print_warnings(const Warnings& w, std::ostream& err)
{
    for (const auto& s : w) err << "warning: " << s << '\n';
}

// ---------------------------------------------------------------------------
// Input handling shared by decompose and calibrate

struct InputOptions {
    std::string path;
    double dt = 4e-3;
    CLI::Option* dt_opt = nullptr;
    std::size_t stride = 1;
    std::string crop;
};

struct LoadedInput {
    Order3Tensor tensor;
    double dt = 0.0;
    Json descriptor;
};

void add_input_options(CLI::App& cmd, InputOptions& o)
{
    cmd.add_option("input", o.path, "HODT tensor file, frame directory, or frame pattern (e.g. 'frames/*.pgm')")
        ->required();
    o.dt_opt = cmd.add_option("--dt", o.dt, "Seconds between source frames (default: HODT header, else 4e-3)")
                   ->check(CLI::PositiveNumber);
    cmd.add_option("--stride", o.stride, "Use every stride-th frame; dt is scaled accordingly")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--crop", o.crop, "Crop rectangle x0,y0,w,h in pixels");
}

std::optional<CropRect> parse_crop(const std::string& s)
{
    if (s.empty()) {
        return std::nullopt;
    }
    const auto parts = split(s, ',');
    if (parts.size() != 4) {
        throw UsageError("--crop expects x0,y0,w,h");
    }
    return CropRect{parse_count(parts[0], "crop x0"), parse_count(parts[1], "crop y0"),
                    parse_count(parts[2], "crop width"), parse_count(parts[3], "crop height")};
}

bool is_hodt(const std::string& path)
{
    std::string ext = fs::path(path).extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".hodt";
}

LoadedInput load_input(const InputOptions& o)
{
    const std::optional<CropRect> crop = parse_crop(o.crop);
    LoadedInput in;
    Json desc;
    desc["path"] = o.path;
    if (is_hodt(o.path)) {
        if (!fs::exists(o.path)) {
            throw IoError("input file does not exist: " + o.path);
        }
        HodtFile f = read_hodt(o.path);
        const double base_dt = o.dt_opt->count() > 0 ? o.dt : f.dt;
        in.tensor = (crop || o.stride > 1) ? crop_and_stride(f.tensor, crop, o.stride) : std::move(f.tensor);
        in.dt = base_dt * static_cast<double>(o.stride);
        desc["format"] = "hodt";
    } else {
        auto [tensor, meta] = load_sequence(o.path, crop, o.stride, o.dt);
        in.tensor = std::move(tensor);
        in.dt = meta.dt;
        desc["format"] = "frames";
        desc["frames"] = meta.sources;
    }
    const auto dims = in.tensor.dims();
    desc["dims"] = {dims[0], dims[1], dims[2]};
    desc["dt"] = in.dt;
    desc["stride"] = o.stride;
    if (crop) {
        desc["crop"] = {crop->x0, crop->y0, crop->width, crop->height};
    } else {
        desc["crop"] = nullptr;
    }
    in.descriptor = std::move(desc);
    return in;
}

std::size_t default_delay(std::size_t k)
{
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(k) / 10.0)));
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeOptions {
    InputOptions in;
    std::size_t d = 0;
    CLI::Option* d_opt = nullptr;
    double eps_svd = 5e-4;
    double eps_dmd = 5e-4;
    bool multidim = false;
    double eps_spatial = 5e-4;
    CLI::Option* eps_spatial_opt = nullptr;
    std::size_t max_iters = 20;
    bool zero_growth = false;
    std::string out = "hodmd_out";
    std::uint64_t seed = 0;
    bool timestamps = false;
};

int cmd_decompose(const DecomposeOptions& o, std::ostream& out, std::ostream& err)
{
    const std::string started = o.timestamps ? utc_now() : std::string();
    const LoadedInput in = load_input(o.in);
    const auto dims = in.tensor.dims();
    const std::size_t k = dims[2];

    HodmdConfig cfg;
    cfg.d = o.d_opt->count() > 0 ? o.d : default_delay(k);
    cfg.eps_svd = o.eps_svd;
    cfg.eps_dmd = o.eps_dmd;
    cfg.dt = in.dt;
    const double eps_spatial = o.eps_spatial_opt->count() > 0 ? o.eps_spatial : o.eps_svd;

    DmdExpansion expansion;
    ReconstructionReport report;
    Warnings warnings;
    Json multidim = nullptr;
    bool converged = true;
    if (o.multidim) {
        MultidimResult r = run_multidim_hodmd(in.tensor, cfg, eps_spatial, o.max_iters, o.zero_growth);
        expansion = std::move(r.expansion.expansion);
        report = r.report;
        warnings = std::move(r.warnings);
        converged = r.converged;
        multidim = Json::object();
        multidim["converged"] = r.converged;
        Json iters = Json::array();
        for (const auto& rec : r.trace) {
            Json j;
            j["P1"] = rec.ranks[0];
            j["P2"] = rec.ranks[1];
            j["N"] = rec.ranks[2];
            j["num_modes"] = rec.num_modes;
            j["rrmse"] = rec.rrmse;
            iters.push_back(std::move(j));
        }
        multidim["iterations"] = std::move(iters);
    } else {
        HodmdResult r = run_hodmd(in.tensor.as_matrix(), cfg, o.zero_growth);
        expansion = std::move(r.expansion);
        report = r.report;
        warnings = std::move(r.warnings);
    }

    const fs::path dir(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory " + dir.string());
    }

    const double a1 = expansion.modes.empty() ? 0.0 : expansion.modes.front().amplitude;
    std::string csv = "index,omega_rad_s,omega_bpm,delta_per_s,amplitude,amplitude_ratio\n";
    Json outputs = Json::array({"frequencies.csv"});
    std::size_t row = 0;
    for (const DmdMode& m : expansion.modes) {
        if (m.frequency < 0.0) {
            continue;
        }
        ++row;
        const double ratio = a1 > 0.0 ? m.amplitude / a1 : 0.0;
        csv += std::to_string(row) + ',' + fmt(m.frequency) + ',' + fmt(to_bpm(m.frequency)) + ',' +
               fmt(m.growth_rate) + ',' + fmt(m.amplitude) + ',' + fmt(ratio) + '\n';
        std::array<char, 32> name{};
        std::snprintf(name.data(), name.size(), "mode_%03zu.pgm", row);
        render_mode(m.spatial, dims[0], dims[1], dir / name.data());
        outputs.push_back(name.data());
    }
    write_text(dir / "frequencies.csv", csv);
    outputs.push_back("report.json");

    Json j;
    j["tool"] = "hodmd";
    j["version"] = kVersion;
    j["command"] = "decompose";
    j["input"] = in.descriptor;
    Json c;
    c["d"] = cfg.d;
    c["eps_svd"] = cfg.eps_svd;
    c["eps_dmd"] = cfg.eps_dmd;
    c["dt"] = cfg.dt;
    c["t1"] = cfg.t1;
    c["multidim"] = o.multidim;
    c["eps_spatial"] = o.multidim ? Json(eps_spatial) : Json(nullptr);
    c["max_iters"] = o.max_iters;
    c["zero_growth"] = o.zero_growth;
    c["seed"] = o.seed;
    j["config"] = std::move(c);
    Json rep;
    rep["rrmse"] = report.rrmse;
    rep["retained_spatial_rank"] = report.retained_spatial_rank;
    rep["retained_temporal_rank"] = report.retained_temporal_rank;
    rep["num_modes"] = report.num_modes;
    rep["num_reported"] = row;
    j["report"] = std::move(rep);
    if (o.multidim) {
        j["multidim"] = std::move(multidim);
    }
    j["outputs"] = std::move(outputs);
    j["warnings"] = warnings;
    if (o.timestamps) {
        j["timestamps"] = {{"started", started}, {"finished", utc_now()}};
    }
    write_text(dir / "report.json", j.dump(2) + '\n');

    print_warnings(warnings, err);
    out << "RRMSE=" << fmt(report.rrmse) << '\n';
    if (!converged) {
        err << "error: multidimensional iteration did not converge within " << o.max_iters << " iterations\n";
        return kToleranceFailure;
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
    std::vector<std::string> modes;
    std::size_t j = 64;
    CLI::Option* j_opt = nullptr;
    std::string dims;
    std::size_t k = 100;
    double dt = 4e-3;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string truth;
};

ModeSpec parse_mode(const std::string& s)
{
    const auto parts = split(s, ',');
    if (parts.size() != 3 && parts.size() != 4) {
        throw UsageError("--mode expects a,omega,delta[,phase], got '" + s + "'");
    }
    ModeSpec m;
    m.amplitude = parse_double(parts[0], "mode amplitude");
    m.frequency = parse_double(parts[1], "mode frequency");
    m.growth_rate = parse_double(parts[2], "mode growth rate");
    if (parts.size() == 4) {
        m.phase = parse_double(parts[3], "mode phase");
    }
    if (!(m.amplitude >= 0.0) || !std::isfinite(m.amplitude) || !std::isfinite(m.frequency) ||
        !std::isfinite(m.growth_rate) || !std::isfinite(m.phase)) {
        throw UsageError("--mode '" + s + "': amplitude must be finite and >= 0, other fields finite");
    }
    return m;
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream&)
{
    std::vector<ModeSpec> specs;
    for (const auto& s : o.modes) specs.push_back(parse_mode(s));
    if (o.k < 2) {
        throw UsageError("--K must be >= 2");
    }

    Order3Tensor t;
    if (!o.dims.empty()) {
        const auto parts = split(o.dims, 'x');
        if (parts.size() != 2) {
            throw UsageError("--dims expects I1xI2");
        }
        const std::size_t i1 = parse_count(parts[0], "I1");
        const std::size_t i2 = parse_count(parts[1], "I2");
        if (i1 < 1 || i2 < 1) {
            throw UsageError("--dims entries must be >= 1");
        }
        t = synth_video(specs, i1, i2, o.k, o.dt, o.seed);
    } else {
        if (o.j < 1) {
            throw UsageError("--J must be >= 1");
        }
        t = Order3Tensor({o.j, 1, o.k});
        t.as_matrix() = synth_matrix(specs, o.j, o.k, o.dt, o.seed);
    }
    const double maxabs = t.as_matrix().cwiseAbs().maxCoeff();
    const double sigma_abs = o.sigma * maxabs;
    if (sigma_abs > 0.0) {
        t = add_noise(t, sigma_abs, o.seed + 1);
    }

    const fs::path path(o.out);
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    write_hodt(path, t, o.dt);

    Json j;
    j["tool"] = "hodmd";
    j["version"] = kVersion;
    j["command"] = "synth";
    const auto dims = t.dims();
    j["dims"] = {dims[0], dims[1], dims[2]};
    j["dt"] = o.dt;
    j["sigma"] = o.sigma;
    j["sigma_absolute"] = sigma_abs;
    j["seed"] = o.seed;
    Json modes = Json::array();
    for (const auto& m : specs) {
        modes.push_back({{"amplitude", m.amplitude},
                         {"frequency", m.frequency},
                         {"growth_rate", m.growth_rate},
                         {"phase", m.phase}});
    }
    j["modes"] = std::move(modes);
    const fs::path truth = o.truth.empty() ? path.parent_path() / "truth.json" : fs::path(o.truth);
    write_text(truth, j.dump(2) + '\n');

    out << "wrote " << path.string() << '\n' << "wrote " << truth.string() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateOptions {
    InputOptions in;
    double eps_svd = 5e-4;
    double eps_dmd = 5e-4;
    std::size_t d_min = 0;
    std::size_t d_max = 0;
    std::size_t d_step = 0;
    CLI::Option* d_min_opt = nullptr;
    CLI::Option* d_max_opt = nullptr;
    CLI::Option* d_step_opt = nullptr;
    std::vector<std::size_t> d_list;
    std::string out;
};

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err)
{
    const LoadedInput in = load_input(o.in);
    const std::size_t k = in.tensor.dim(3);

    std::vector<std::size_t> candidates;
    if (!o.d_list.empty()) {
        candidates = o.d_list;
    } else if (o.d_min_opt->count() + o.d_max_opt->count() + o.d_step_opt->count() > 0) {
        const auto round_frac = [&](double f) {
            return static_cast<std::size_t>(std::llround(f * static_cast<double>(k)));
        };
        const std::size_t lo = o.d_min_opt->count() > 0 ? o.d_min : std::max<std::size_t>(1, round_frac(0.1));
        const std::size_t hi = o.d_max_opt->count() > 0 ? o.d_max : round_frac(0.4);
        const std::size_t step =
            o.d_step_opt->count() > 0 ? o.d_step : std::max<std::size_t>(1, round_frac(0.05));
        if (lo < 1 || step < 1) {
            throw UsageError("--d-min and --d-step must be >= 1");
        }
        for (std::size_t d = lo; d <= hi; d += step) candidates.push_back(d);
    } else {
        candidates = default_d_candidates(k);
    }
    std::vector<std::size_t> kept;
    for (std::size_t d : candidates) {
        if (d < 1) {
            throw UsageError("delay index d must be >= 1");
        }
        if (d >= k) {
            err << "warning: dropping d=" << d << " (K=" << k << ")\n";
            continue;
        }
        kept.push_back(d);
    }
    if (kept.empty()) {
        throw UsageError("no candidate d below the snapshot count K=" + std::to_string(k));
    }

    HodmdConfig cfg;
    cfg.eps_svd = o.eps_svd;
    cfg.eps_dmd = o.eps_dmd;
    cfg.dt = in.dt;
    const CalibrationResult res = calibrate_d(in.tensor.as_matrix(), cfg, kept);

    std::string table = "d,N,N_prime,M,rrmse\n";
    for (const auto& r : res.rows) {
        table += std::to_string(r.d) + ',' + std::to_string(r.spatial_rank) + ',' + std::to_string(r.temporal_rank) +
                 ',' + std::to_string(r.num_modes) + ',' + fmt(r.rrmse) + '\n';
    }
    out << table << "best_d=" << res.best_d << '\n';
    if (!o.out.empty()) {
        write_text(o.out, table);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
    std::string truth;
    std::string report_dir;
    double tol_omega = 1e-6;
    double tol_delta = 0.0;
    CLI::Option* tol_delta_opt = nullptr;
    double tol_amplitude = 0.0;
    CLI::Option* tol_amplitude_opt = nullptr;
};

std::vector<ModeSpec> read_truth(const fs::path& path)
{
    const Json j = Json::parse(read_text(path), nullptr, false);
    if (j.is_discarded() || !j.contains("modes") || !j["modes"].is_array()) {
        throw IoError("malformed truth file " + path.string());
    }
    std::vector<ModeSpec> specs;
    for (const auto& m : j["modes"]) {
        ModeSpec s;
        s.amplitude = m.value("amplitude", 0.0);
        s.frequency = m.value("frequency", 0.0);
        s.growth_rate = m.value("growth_rate", 0.0);
        s.phase = m.value("phase", 0.0);
        specs.push_back(s);
    }
    return specs;
}

DmdExpansion read_frequencies(const fs::path& path)
{
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("empty frequencies file " + path.string());
    }
    const auto header = split(line, ',');
    const auto column = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw IoError("frequencies file " + path.string() + " lacks column " + name);
    };
    const std::size_t c_omega = column("omega_rad_s");
    const std::size_t c_delta = column("delta_per_s");
    const std::size_t c_amp = column("amplitude");
    DmdExpansion e;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw IoError("malformed row in " + path.string() + ": " + line);
        }
        DmdMode m;
        try {
            m.frequency = parse_double(cells[c_omega], "omega");
            m.growth_rate = parse_double(cells[c_delta], "delta");
            m.amplitude = parse_double(cells[c_amp], "amplitude");
        } catch (const UsageError& ex) {
            throw IoError(std::string("malformed row in ") + path.string() + ": " + ex.what());
        }
        e.modes.push_back(m);
    }
    return e;
}

int cmd_compare(const CompareOptions& o, std::ostream& out, std::ostream&)
{
    const std::vector<ModeSpec> truth = read_truth(o.truth);
    const DmdExpansion rec = read_frequencies(fs::path(o.report_dir) / "frequencies.csv");
    const MatchReport rep = match_spectra(truth, rec, o.tol_omega);

    bool pass = rep.all_truth_matched();
    for (const auto& p : rep.pairs) {
        out << "match truth_omega=" << fmt(p.truth_frequency)
            << " recovered_omega=" << fmt(rec.modes[p.recovered_index].frequency) << " d_omega=" << fmt(p.d_omega)
            << " d_delta=" << fmt(p.d_delta) << " amplitude_rel_error=" << fmt(p.amplitude_rel_error) << '\n';
        if (o.tol_delta_opt->count() > 0 && p.d_delta > o.tol_delta) pass = false;
        if (o.tol_amplitude_opt->count() > 0 && p.amplitude_rel_error > o.tol_amplitude) pass = false;
    }
    for (std::size_t t : rep.unmatched_truth) {
        out << "unmatched truth_omega=" << fmt(std::abs(truth[t].frequency)) << '\n';
    }
    for (std::size_t r : rep.unmatched_recovered) {
        out << "extra recovered_omega=" << fmt(rec.modes[r].frequency) << " amplitude=" << fmt(rec.modes[r].amplitude)
            << '\n';
    }
    if (!rep.noise_floor.empty()) {
        out << "noise_floor modes=" << rep.noise_floor.size() << '\n';
    }
    out << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kOk : kToleranceFailure;
}

void apply_thread_cap(std::ostream& err)
{
    const char* env = std::getenv("HODMD_THREADS");
    if (env == nullptr || *env == '\0') {
        return;
    }
    int n = 0;
    const std::string s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || n < 1) {
        err << "warning: ignoring HODMD_THREADS='" << s << "' (expected a positive integer)\n";
        return;
    }
    Eigen::setNbThreads(n);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Higher order dynamic mode decomposition of snapshot data and image sequences", "hodmd"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    DecomposeOptions dec;
    CLI::App* decompose = app.add_subcommand("decompose", "Run HODMD and write frequencies, modes and a report");
    add_input_options(*decompose, dec.in);
    dec.d_opt = decompose->add_option("--d", dec.d, "Delay index (default: round(K/10))")
                    ->check(CLI::Validator(
                        [](std::string& v) { return v == "0" ? std::string("delay index d must be >= 1") : std::string(); },
                        "D>=1"));
    decompose->add_option("--eps-svd", dec.eps_svd, "Relative SVD tolerance")->check(CLI::Range(0.0, 1.0));
    decompose->add_option("--eps-dmd", dec.eps_dmd, "Relative amplitude tolerance")->check(CLI::Range(0.0, 1.0));
    decompose->add_flag("--multidim", dec.multidim, "Iterative multidimensional HODMD on the frame tensor");
    dec.eps_spatial_opt = decompose->add_option("--eps-spatial", dec.eps_spatial,
                                                "Spatial HOSVD tolerance for --multidim (default: --eps-svd)")
                              ->check(CLI::Range(0.0, 1.0));
    decompose->add_option("--max-iters", dec.max_iters, "Iteration cap for --multidim")->check(CLI::PositiveNumber);
    decompose->add_flag("--zero-growth", dec.zero_growth, "Reconstruct with growth rates set to zero");
    decompose->add_option("--out", dec.out, "Output directory");
    decompose->add_option("--seed", dec.seed, "Seed echoed into the run manifest");
    decompose->add_flag("--timestamps", dec.timestamps, "Record wall-clock times in report.json");

    SynthOptions syn;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic HODT tensor and its ground truth");
    synth->add_option("--mode", syn.modes, "Mode a,omega,delta[,phase] (rad/s, 1/s, rad); repeatable")
        ->required()
        ->allow_extra_args(false);
    syn.j_opt = synth->add_option("--J", syn.j, "State dimension for a J x 1 x K tensor");
    synth->add_option("--dims", syn.dims, "Frame size I1xI2 for a video tensor")->excludes(syn.j_opt);
    synth->add_option("--K", syn.k, "Number of snapshots");
    synth->add_option("--dt", syn.dt, "Seconds between snapshots")->check(CLI::PositiveNumber);
    synth->add_option("--sigma", syn.sigma, "Gaussian noise level relative to max |data|")
        ->check(CLI::NonNegativeNumber);
    synth->add_option("--seed", syn.seed, "Random seed");
    synth->add_option("--out", syn.out, "Output HODT file")->required();
    synth->add_option("--truth", syn.truth, "Ground-truth JSON path (default: truth.json next to --out)");

    CalibrateOptions cal;
    CLI::App* calibrate = app.add_subcommand("calibrate", "Sweep the delay index and report RRMSE per d");
    add_input_options(*calibrate, cal.in);
    calibrate->add_option("--eps-svd", cal.eps_svd, "Relative SVD tolerance")->check(CLI::Range(0.0, 1.0));
    calibrate->add_option("--eps-dmd", cal.eps_dmd, "Relative amplitude tolerance")->check(CLI::Range(0.0, 1.0));
    cal.d_min_opt = calibrate->add_option("--d-min", cal.d_min, "First d of the sweep");
    cal.d_max_opt = calibrate->add_option("--d-max", cal.d_max, "Last d of the sweep");
    cal.d_step_opt = calibrate->add_option("--d-step", cal.d_step, "Sweep step");
    calibrate->add_option("--d-list", cal.d_list, "Explicit comma-separated d values")
        ->delimiter(',')
        ->excludes(cal.d_min_opt)
        ->excludes(cal.d_max_opt)
        ->excludes(cal.d_step_opt);
    calibrate->add_option("--out", cal.out, "Write the table as CSV");

    CompareOptions cmp;
    CLI::App* compare = app.add_subcommand("compare", "Match a decomposition report against synthetic ground truth");
    compare->add_option("truth", cmp.truth, "truth.json written by synth")->required();
    compare->add_option("report_dir", cmp.report_dir, "Output directory of decompose")->required();
    compare->add_option("--tol-omega", cmp.tol_omega, "Frequency tolerance, rad/s")->check(CLI::PositiveNumber);
    cmp.tol_delta_opt = compare->add_option("--tol-delta", cmp.tol_delta, "Growth-rate tolerance, 1/s");
    cmp.tol_amplitude_opt = compare->add_option("--tol-amplitude", cmp.tol_amplitude, "Relative amplitude tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    apply_thread_cap(err);
    try {
        if (decompose->parsed()) return cmd_decompose(dec, out, err);
        if (synth->parsed()) return cmd_synth(syn, out, err);
        if (calibrate->parsed()) return cmd_calibrate(cal, out, err);
        if (compare->parsed()) return cmd_compare(cmp, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kToleranceFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kToleranceFailure;
    }
    return kUsageError;
}

} // namespace hodmd::cli
