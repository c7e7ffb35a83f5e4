"""Compare HVAC controllers through energy and comfort characteristics."""
