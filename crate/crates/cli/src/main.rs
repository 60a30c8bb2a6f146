fn main() { println!("univopt"); }
