pub mod bvp_oracle;
