fn main() {
    std::process::exit(manifold_mean_cli::run(std::env::args_os()));
}
