fn main() {
    std::process::exit(permwalk::experiments::cli_main(std::env::args()));
}
