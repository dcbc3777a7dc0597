fn main() {
    std::process::exit(rfs::cli::run(std::env::args_os()));
}
