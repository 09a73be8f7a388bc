fn main() {
    std::process::exit(necklace::run(std::env::args_os()));
}
