use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = chaos_stein::cli::Args::parse();
    std::process::exit(chaos_stein::cli::main_with_args(&args));
}
