fn main() {
    std::process::exit(radial_wkb::cli::run(std::env::args_os()));
}
