#include "run.hpp"

#include <entropic/errors.hpp>

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Minimum cross-entropy calibration and pricing of bespoke CDO tranches"};
    std::string config_path;
    std::string mode;
    int threads = -1;
    std::string out_dir;
    bool verbose = false;
    app.add_option("--config", config_path, "Run configuration (JSON)")->required();
    app.add_option("--mode", mode, "calibrate-static | calibrate-dynamic | price-bespoke | map-basecorr");
    app.add_option("--threads", threads, "Worker threads (0: ENTROPIC_BESPOKE_THREADS or 1)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--verbose", verbose, "Progress messages on stderr");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        entropic::cli::RunConfig config = entropic::cli::load_config(config_path);
        if (!mode.empty())
            config.mode = entropic::cli::parse_mode(mode);
        if (threads >= 0)
            config.threads = threads;
        if (!out_dir.empty())
            config.output_dir = out_dir;
        config.verbose = verbose;
        entropic::cli::run(config);
    } catch (const entropic::Error& e) {
        std::cerr << "error: " << entropic::code_name(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
