"""
Morphing Gripper Simulator - results API application
"""
from flask import Flask, jsonify

from config import DEBUG, HOST, LOG_FILE, LOG_LEVEL, PORT
from utils.logger import setup_logger

# Setup logging
logger = setup_logger(__name__, LOG_FILE, LOG_LEVEL)


def create_app(config=None):
    """
    Application factory

    Args:
        config: Extra Flask config; RUN_CONFIG may hold a RunConfig to serve
            instead of the defaults
    """
    app_instance = Flask(__name__)
    app_instance.config['DEBUG'] = DEBUG
    app_instance.config['JSON_SORT_KEYS'] = True
    app_instance.config['RUN_CONFIG'] = None

    if config:
        app_instance.config.update(config)

    from blueprints import api_bp
    app_instance.register_blueprint(api_bp)

    @app_instance.errorhandler(404)
    def not_found(error):
        logger.warning(f"404 error: {error}")
        return jsonify({"success": False, "error": "Not found"}), 404

    @app_instance.errorhandler(500)
    def internal_error(error):
        logger.error(f"500 error: {str(error)}", exc_info=True)
        return jsonify({"success": False, "error": "Internal server error"}), 500

    logger.info("Flask application initialized")
    return app_instance


# ================= MAIN ENTRY POINT =================
if __name__ == "__main__":
    app = create_app()
    try:
        logger.info(f"Starting results API on {HOST}:{PORT}")
        app.run(host=HOST, port=PORT, debug=DEBUG, threaded=True)
    except Exception as e:
        logger.error(f"Error starting Flask app: {str(e)}", exc_info=True)
        raise
