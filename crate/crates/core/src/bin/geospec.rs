fn main() {
    std::process::exit(geospec::cli::main_exit());
}
