fn main() {
    std::process::exit(qgeom::cli::run(std::env::args_os()));
}
