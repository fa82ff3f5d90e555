fn main() {
    std::process::exit(cyclab::run(std::env::args_os()));
}
