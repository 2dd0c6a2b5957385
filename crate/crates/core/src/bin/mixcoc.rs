fn main() {
    std::process::exit(mixed_cocycles::experiments::run_cli(std::env::args_os()));
}
