fn main() {
    std::process::exit(tabgen::cli::main());
}
