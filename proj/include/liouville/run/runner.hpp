#pragma once

// Batch runner: parses the TOML config, executes experiments on a bounded
// worker pool, writes artifacts atomically (tmp + rename) and a manifest
// with content hashes. Exit contract: 0 all binding checks pass, 1 job crash
// or binding failure, 2 config error.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "liouville/run/experiments.hpp"

namespace liouville::run {

namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "liouville-lab 1.0.0";

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out = "run-out";
    int jobs = 1;
    std::vector<std::pair<std::string, TomlTable>> experiments;  // (name, table)
    std::string raw_text;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    cfg.raw_text = text;
    TomlTable root;
    try {
        root = parse_toml(text);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.seed = std::uint64_t(toml_number(root, "seed", 1));
    cfg.out = toml_string(root, "out", "run-out");
    cfg.jobs = int(toml_number(root, "jobs", 1));
    if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
    auto it = root.find("experiment");
    if (it == root.end() || !it->second.is_array() || it->second.as_array().empty())
        throw ConfigError("config defines no [[experiment]] tables");
    int index = 0;
    for (const auto& v : it->second.as_array()) {
        if (!v.is_table()) throw ConfigError("[[experiment]] entries must be tables");
        const TomlTable& t = v.as_table();
        try {
            validate_experiment(t);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        std::string name = toml_string(t, "name", "");
        if (name.empty())
            name = toml_string(t, "kind", "job") + "-" + std::to_string(index);
        for (const auto& [n, _] : cfg.experiments)
            if (n == name) throw ConfigError("duplicate experiment name '" + name + "'");
        cfg.experiments.emplace_back(name, t);
        ++index;
    }
    return cfg;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), std::streamsize(content.size()));
    }
    fs::rename(tmp, path);
}

struct RunOutcome {
    std::vector<JobResult> results;
    json manifest;
    int exit_code = 0;
};

inline RunOutcome run_all(const RunConfig& cfg, const std::string& out_override, int jobs_override,
                          std::ostream& log) {
    fs::path outdir = out_override.empty() ? fs::path(cfg.out) : fs::path(out_override);
    int jobs = jobs_override > 0 ? jobs_override : cfg.jobs;
    fs::create_directories(outdir);

    std::vector<JobResult> results(cfg.experiments.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= cfg.experiments.size()) return;
            const auto& [name, table] = cfg.experiments[i];
            auto t0 = std::chrono::steady_clock::now();
            JobResult r;
            try {
                r = run_experiment(name, table, cfg.seed);
            } catch (const std::exception& e) {
                r.name = name;
                r.kind = toml_string(table, "kind", "?");
                r.verdict = "crash";
                r.summary = e.what();
                r.report = json{{"name", name}, {"kind", r.kind}, {"verdict", "crash"},
                                {"error", e.what()}};
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            {
                std::lock_guard<std::mutex> lk(log_mutex);
                log << "[" << r.verdict << "] " << r.name << ": " << r.summary << "  ("
                    << format_f(r.seconds, 1) << " s)\n";
            }
            results[i] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    int nthreads = std::min<int>(jobs, int(cfg.experiments.size()));
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    // Write artifacts and assemble the manifest.
    json jobs_json = json::array();
    bool any_binding_failure = false;
    for (auto& r : results) {
        json files = json::array();
        fs::path jobdir = outdir / r.name;
        r.files.push_back({"report.json", r.report.dump(2) + "\n"});
        for (const auto& f : r.files) {
            fs::path p = jobdir / f.filename;
            write_atomic(p, f.content);
            files.push_back({{"path", fs::relative(p, outdir).generic_string()},
                             {"bytes", f.content.size()},
                             {"fnv1a64", hash_hex(fnv1a64(f.content))}});
        }
        if (r.binding && r.failed_binding()) any_binding_failure = true;
        jobs_json.push_back({{"name", r.name},
                             {"kind", r.kind},
                             {"verdict", r.verdict},
                             {"binding", r.binding},
                             {"summary", r.summary},
                             {"seconds", r.seconds},
                             {"files", files}});
    }
    RunOutcome out;
    out.results = std::move(results);
    out.manifest = json{{"tool", kToolVersion},
                        {"config_fnv1a64", hash_hex(fnv1a64(cfg.raw_text))},
                        {"seed", cfg.seed},
                        {"jobs", jobs_json}};
    write_atomic(outdir / "manifest.json", out.manifest.dump(2) + "\n");
    out.exit_code = any_binding_failure ? 1 : 0;
    return out;
}

// One table row per job, read back from a run directory.
inline int report_run(const std::string& dir, std::ostream& out) {
    fs::path manifest_path = fs::path(dir) / "manifest.json";
    std::ifstream in(manifest_path);
    if (!in) {
        out << "error: no manifest at " << manifest_path.string() << "\n";
        return 2;
    }
    json manifest = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (manifest.is_discarded()) {
        out << "error: unparsable manifest at " << manifest_path.string() << "\n";
        return 2;
    }
    out << manifest.value("tool", "?") << "  (config " << manifest.value("config_fnv1a64", "?")
        << ", seed " << manifest.value("seed", 0) << ")\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-18s %-14s %8s  %s\n", "name", "kind", "verdict",
                  "seconds", "summary");
    out << line;
    int code = 0;
    for (const auto& j : manifest.value("jobs", json::array())) {
        std::string verdict = j.value("verdict", "?");
        std::snprintf(line, sizeof line, "%-24s %-18s %-14s %8.1f  ",
                      j.value("name", "?").c_str(), j.value("kind", "?").c_str(), verdict.c_str(),
                      j.value("seconds", 0.0));
        out << line << j.value("summary", "") << "\n";
        if (j.value("binding", true) && (verdict == "fail" || verdict == "crash")) code = 1;
    }
    return code;
}

inline const char* config_schema() {
    return R"(liouville-lab run config (TOML subset)
=======================================

Top level:
  seed = 42            # uint; every random draw derives from it
  out  = "runs/demo"   # output directory (CLI --out overrides)
  jobs = 2             # worker pool size (CLI --jobs overrides)

One [[experiment]] table per job. Common keys:
  kind = "corner-rate" # required, one of the kinds below
  name = "corner05"    # optional; defaults to kind-<index>

Kinds and their keys (defaults in parentheses):
  disk-validate      radius(1) h([1/32,1/64,1/128]) h_check(1/64) tol(5e-4)
                     d_floor(0.1) order_lo(1.5) order_hi(2.5)
  smooth-rate        radius(1) h(1/256) d_lo(0.05) d_hi(0.4)
                     slope_lo(1.8) slope_hi(2.2) per_octave(4)
  c1alpha-rate       alpha(0.5) M(0.2) R(1) mu(1) h(1/256)
                     slope_min(alpha-0.2) d_lo(20h) d_hi(0.2R) per_octave(4)
                     # mu != 1 runs the corner-Remark variant (advisory)
  corner-rate        mu(0.5) amp(+-0.3 by mu) R(1) h(1/256) slope_min(0.8)
                     d_lo(20h) d_hi(0.2R) per_octave(4)
  localization       mu(0.5) h(1/128) slope_min(1/mu - 0.4) r_lo r_hi(0.45)
                     per_octave(5)
  bracket-audit      h(1/64) points(1000) slack(10 h^2)
  supersub-audit     mu([0.3,0.9,1.5]) A([0.5,2]) points(10000)
  kahler-product     n(2) points(1000) residual_tol(1e-6) bound_samples(300)
  convergence-study  domain("disk") h(list) order_lo order_hi plus domain
                     parameters r/R/mu/amp/alpha/M/a/lobes
                     # order bounds make the verdict binding; else info

Values: strings "..."; numbers; booleans; flat arrays [a, b, c].
Sections: [table] and [[array-of-tables]]. Comments start with #.
Not supported: dotted keys, inline tables, multi-line strings.

The environment variable LIOUVILLE_MAX_GRID_MB caps solver grid allocation.
)";
}

}  // namespace liouville::run
