fn main() {
    std::process::exit(equipart::cli::run(std::env::args_os()));
}
