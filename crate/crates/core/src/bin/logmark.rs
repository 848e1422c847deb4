fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WM_LOG", "warn")).init();
    std::process::exit(logmark::cli::run(std::env::args_os()));
}
