"""Digital and digital-analog Trotter simulation workbench."""
