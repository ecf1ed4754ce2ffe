"""
Tests for the rb-lab entry point.
"""
import logging
import os
import sys
from io import StringIO
from unittest.mock import patch

import pytest

# Add the src directory to the path for testing
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))


def test_main_import():
    """Test that main module can be imported."""
    try:
        import main  # noqa: F401
    except ImportError:
        pytest.fail("Could not import main module")


def test_configure_logging():
    """Test that configure_logging sets up the root logger."""
    import main

    with patch('main.logging.basicConfig') as basic_config:
        main.configure_logging(debug=True)
        assert basic_config.call_args.kwargs["level"] == logging.DEBUG
        main.configure_logging(debug=False)
        assert basic_config.call_args.kwargs["level"] == logging.WARNING


def test_main_help():
    """Test that main runs the help command."""
    import main

    with patch('sys.stdout', new_callable=StringIO) as mock_stdout:
        assert main.main(["help"]) == 0
    assert "Available Commands:" in mock_stdout.getvalue()


def test_main_uses_environment_defaults():
    """Test that main passes the configured output directory to the CLI."""
    import main

    with patch.object(main, 'RB_OUT_DIR', 'custom_out'), patch('main.CLI') as cli_class:
        cli_class.return_value.run.return_value = 0
        assert main.main(["verify"]) == 0
        assert cli_class.call_args.kwargs["out_dir"] == "custom_out"
        cli_class.return_value.run.assert_called_once_with(["verify"])
