fn main() {
    std::process::exit(ousv::cli::run(std::env::args_os()));
}
