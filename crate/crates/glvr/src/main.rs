fn main() {
    std::process::exit(glvr::cli::run());
}
