fn main() {
    std::process::exit(beq::cli::main(std::env::args()));
}
